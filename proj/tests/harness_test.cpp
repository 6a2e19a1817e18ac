#include <gtest/gtest.h>
#include "causalreg/experiments.hpp"
