#include <string>

#include "CLI11.hpp"
#include "qtrap/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"qtrap: trap currents, exponents and entropy bounds"};
    std::string command;
    std::string config;
    app.add_option("command", command, "one of: moments current jtilde-scan exponent bernoulli-table entropy "
                                       "oracle-compare baselines")
        ->required();
    app.add_option("config", config, "run configuration file")->required();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : qtrap::cli::exit_validation;
    }
    return qtrap::cli::run(command, config);
}
