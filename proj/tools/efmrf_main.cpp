#include <iostream>

#include "efmrf/cli.hpp"

int main(int argc, char** argv) { return efmrf::dispatch(argc, argv, std::cout, std::cerr); }
