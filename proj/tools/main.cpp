#include "drove/cli.hpp"

int main(int argc, char **argv)
{
	return drove::run_cli(argc, argv);
}
