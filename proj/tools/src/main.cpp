#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) { return tailcluster::cli::dispatch(argc, argv, std::cout, std::cerr); }
