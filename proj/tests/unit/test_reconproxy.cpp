#include <doctest.h>

TEST_SUITE("reconproxy") {}
