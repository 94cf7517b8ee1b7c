// Regenerates the bundled table1 fixture (run after changing any prompt
// builder; the acceptance suite checks the committed copy stays in sync).
#include <iostream>

#include "support/fixture.hpp"

int main(int argc, char** argv) {
    auto dir = argc > 1 ? std::filesystem::path(argv[1]) : weakbench::testfix::fixture_dir();
    weakbench::testfix::write_table1_fixture(dir);
    std::cout << "fixture written to " << dir << "\n";
    return 0;
}
