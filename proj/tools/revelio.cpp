#include "revelio/cli.hpp"

int main(int argc, char** argv) { return revelio::cli::run(argc, argv); }
