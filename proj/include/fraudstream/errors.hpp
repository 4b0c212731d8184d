#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fraudstream {

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    ParseError(const std::string& what, std::size_t row)
        : std::runtime_error(what + " (row " + std::to_string(row) + ")"), row_number(row) {}
    std::size_t row_number;
};

struct EmptyDatasetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StratificationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingleClassError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainingDivergedError : std::runtime_error {
    TrainingDivergedError(const std::string& what, std::size_t epoch)
        : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ")"), epoch(epoch) {}
    std::size_t epoch;
};

struct UnsupportedSolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateTestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingleClassWindowError : std::runtime_error {
    SingleClassWindowError(const std::string& what, std::int64_t window)
        : std::runtime_error(what + " (window " + std::to_string(window) + ")"), window_id(window) {}
    std::int64_t window_id;
};

struct EmptyResultError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StateError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace fraudstream
