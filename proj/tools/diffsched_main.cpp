#include <iostream>
#include <string>
#include <vector>

#include "diffsched/cli.hpp"

int main(int argc, char** argv) {
    return diffsched::cli::dispatch(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
