#include <iostream>
#include <string>
#include <vector>

#include "lattes/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return lattes::cli::run(args, std::cout);
}
