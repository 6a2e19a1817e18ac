#include <gtest/gtest.h>
#include "causalreg/estimator.hpp"
