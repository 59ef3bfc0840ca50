#pragma once

#include <chrono>
#include <iosfwd>
#include <string>
#include <vector>

#include "io.hpp"

namespace bispectral::cli {

struct CheckRecord {
    std::string name;
    /// Plain statement of the invariant the check exercises.
    std::string clause;
    bool passed = false;
    double residual = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

/// Machine-readable outcome of one command. Everything except "timing" is a
/// function of the inputs and the seed.
class Report {
public:
    explicit Report(std::string command);

    void add_input(const std::string& name, const std::string& bytes);
    void set_option(const std::string& key, io::Json value) { options_[key] = std::move(value); }
    io::Json& result() { return result_; }

    /// Passes when residual <= tolerance (NaN fails).
    void check(const std::string& name, const std::string& clause, double residual, double tolerance, std::string detail = {});
    /// Boolean check, residual 0 or 1 against tolerance 0.
    void check(const std::string& name, const std::string& clause, bool passed, std::string detail = {});

    const std::vector<CheckRecord>& checks() const noexcept { return checks_; }
    bool passed() const;
    io::Json to_json() const;

private:
    std::string command_;
    io::Json inputs_ = io::Json::object();
    io::Json options_ = io::Json::object();
    io::Json result_ = io::Json::object();
    std::vector<CheckRecord> checks_;
    std::chrono::steady_clock::time_point start_;
};

/// Hex SHA-256 of a byte string.
std::string digest(const std::string& bytes);

/// Runs one command line (without the program name). Exit codes: 0 when all
/// checks pass, 1 when a check fails, 2 on usage, parse or validation errors.
/// The report goes to --out when given, otherwise to `out`; diagnostics go to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bispectral::cli
