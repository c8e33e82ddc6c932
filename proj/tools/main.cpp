#include "commands.hpp"

int main(int argc, char** argv) { return readability::cli::run(argc, argv); }
