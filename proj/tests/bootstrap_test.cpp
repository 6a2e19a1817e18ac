#include <gtest/gtest.h>
#include "causalreg/bootstrap.hpp"
