#include <iostream>
#include <string>
#include <vector>

#include "ch4flux/commands.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return ch4flux::cli::run(args, std::cout, std::cerr);
}
