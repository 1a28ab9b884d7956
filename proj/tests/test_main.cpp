#include <string>

#include "gtest/gtest.h"

std::string g_cli_path;

int main(int argc, char** argv) {
    testing::InitGoogleTest(&argc, argv);
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg.rfind("--cli=", 0) == 0) g_cli_path = arg.substr(6);
    }
    return RUN_ALL_TESTS();
}
