#pragma once

#include "dmc/model.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace dmc {

inline constexpr int model_format_version = 1;

// JSON model format:
//
//   { "format_version": 1,
//     "agents":  [ {"name": "1", "states": ["in1", "T1", ...], "initial": "in1"}, ... ],
//     "actions": [ {"name": "a1", "loc": ["1"], "enabled": [["in1"]],
//                   "distribution": [ {"from": ["in1"],
//                                      "to": [[["T1"], "1/2", "e_t"], [["H1"], "0.5"]]} ] } ],
//     "valuations": { "W1": ["win1"] },
//     "metadata": { ... } }
//
// Tuples list state names in the order of the action's "loc". Probabilities
// are decimal or "p/q" strings (plain JSON numbers are accepted too). The
// optional third element of an outcome is an event label used for printing.
model parse_model(std::string_view json_text);
model load_model(const std::filesystem::path& path);

// Canonical form: loc sorted by agent order, exact fractions, one
// distribution row per line. serialize(parse(serialize(m))) == serialize(m).
std::string serialize_model(const model& m);
void save_model(const model& m, const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace dmc
