#include <gtest/gtest.h>
#include "causalreg/bounds.hpp"
