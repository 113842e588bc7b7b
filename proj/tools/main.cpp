#include <iostream>

#include "slotcnn/cli/cli.hpp"

int main(int argc, char** argv) { return slotcnn::cli::run(argc, argv, std::cout, std::cerr); }
