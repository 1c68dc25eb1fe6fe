#include "cli.h"

int main(int argc, char** argv) { return embscore::RunCli(argc, argv); }
