#include <string>
#include <vector>

#include "nonlocal/cli.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return nonlocal::cli::main(args);
}
