#ifndef AMSOD_CLI_HPP
#define AMSOD_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "amsod/experiments.hpp"
#include "amsod/ingest.hpp"

namespace amsod::cli {

enum ExitCode : int { ok = 0, invalid = 1, failure = 2 };

struct Command {
    std::string verb;
    std::vector<std::filesystem::path> scenarios;
    std::filesystem::path out = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> replications;
    exp::ReportFormat format = exp::ReportFormat::csv;
    unsigned workers = 0;
    std::optional<std::filesystem::path> trace;

    // sweep
    exp::SweepDimension dimension = exp::SweepDimension::capacity;
    std::vector<double> values;

    // ingest
    std::filesystem::path data;
    std::string route_id;
    std::string case_name;
    std::optional<ingest::RouteAxis> axis;
};

/// Runs a parsed command. Validation and input errors return 1, anything
/// else that fails returns 2.
int execute(const Command& cmd, std::ostream& out, std::ostream& err);

/// Parses argv and runs it. Usage errors print help and return 1.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace amsod::cli

#endif // AMSOD_CLI_HPP
