#include "jrmpc/cli.hpp"

int main(int argc, char** argv) { return jrmpc::cli_main(argc, argv); }
