#include <doctest.h>

TEST_SUITE("dataio") {}
