#include <capgame/cli.hpp>

int main(int argc, char** argv) { return capgame::cli::run(argc, argv); }
