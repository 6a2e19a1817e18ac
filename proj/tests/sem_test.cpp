#include <gtest/gtest.h>
#include "causalreg/sem.hpp"
