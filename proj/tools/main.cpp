#include "pairwalk/cli.hpp"

int main(int argc, char** argv) {
    return pairwalk::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
