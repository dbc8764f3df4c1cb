#include <doctest.h>

TEST_SUITE("bench") {}
