#include <gtest/gtest.h>
#include "causalreg/moments.hpp"
