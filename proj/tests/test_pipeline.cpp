#include <catch2/catch_amalgamated.hpp>
#include "biaslens/report.hpp"
