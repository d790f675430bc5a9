#include <gtest/gtest.h>
#include "treespec/cli_app.hpp"
