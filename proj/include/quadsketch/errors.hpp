#pragma once

#include <stdexcept>
#include <string>

namespace quadsketch {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Record is syntactically valid JSON but missing required fields.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct VocabError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DecodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace quadsketch
