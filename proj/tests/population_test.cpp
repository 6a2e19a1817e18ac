#include <gtest/gtest.h>
#include "causalreg/population.hpp"
