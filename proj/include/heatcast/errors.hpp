#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace heatcast {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shape disagreement between linear-algebra operands or model/data sizes.
struct DimensionError : Error {
    using Error::Error;
};

/// Malformed input text. `line` is 1-based when known, 0 otherwise.
struct ParseError : Error {
    std::size_t line = 0;
    explicit ParseError(const std::string& msg, std::size_t line_no = 0)
        : Error(line_no ? msg + " (line " + std::to_string(line_no) + ")" : msg), line(line_no) {}
};

/// Well-formed input that violates a data invariant.
struct ValidationError : Error {
    using Error::Error;
};

/// Inconsistent configuration, e.g. model and dataset built from different stats.
struct ConfigError : Error {
    using Error::Error;
};

/// Model file does not match the expected schema or version.
struct FormatError : Error {
    using Error::Error;
};

/// A statistic that the computation divides by collapsed to zero.
struct DegenerateDataError : Error {
    using Error::Error;
};

/// No usable samples remained after windowing.
struct EmptyDatasetError : Error {
    using Error::Error;
};

/// Training produced a non-finite loss.
struct DivergenceError : Error {
    std::size_t sample_index = 0;
    explicit DivergenceError(std::size_t index)
        : Error("non-finite training loss at sample " + std::to_string(index)), sample_index(index) {}
};

/// A day-level metric was asked for on a day without 24 predictions.
struct PartialDayError : Error {
    using Error::Error;
};

} // namespace heatcast
