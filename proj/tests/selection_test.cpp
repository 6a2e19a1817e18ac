#include <gtest/gtest.h>
#include "causalreg/selection.hpp"
