#include "msf/cli_app.hpp"

int main(int argc, char** argv) { return msf::run_cli(argc, argv); }
