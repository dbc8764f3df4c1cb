#include <doctest.h>

TEST_SUITE("selection") {}
