#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "acceptance_util.hpp"

#include <string>
#include <vector>

int main(int argc, char** argv) {
    std::vector<char*> forwarded;
    for (int i = 0; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg.rfind("--cli-path=", 0) == 0)
            acceptance::cli_path() = arg.substr(11);
        else
            forwarded.push_back(argv[i]);
    }
    doctest::Context context(static_cast<int>(forwarded.size()), forwarded.data());
    return context.run();
}
