#pragma once

// Plain-text model description format.
//
//   n <N>                 vertex count, once, first
//   graph                 starts a family member
//   e <i> <j>             undirected edge of the current graph (1-based)
//   bounds <lo> <hi>      claimed spectral bounds of the family
//   blocks <nx> <nw> <nz> optional agent blocks, followed by twelve lines
//   Ad <numbers...>       block values, row-major (likewise Ac Ap Bd Bc Bp
//                         Cd Cc Cp Dd Dc Dp)
//
// '#' starts a comment; blank lines are ignored.

#include "swmas/graph.hpp"
#include "swmas/model.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace swmas {

struct ModelFile {
    GraphFamily family;
    std::optional<DecomposableMatrices> blocks;
};

/// Parse a model description. Errors carry the offending line number.
ModelFile parse_model(std::istream& in);
ModelFile parse_model_file(const std::string& path);

std::string write_model(const ModelFile& model);

/// Shortest round-trippable decimal form, locale-independent.
std::string format_double(double value);

}  // namespace swmas
