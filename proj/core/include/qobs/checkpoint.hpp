#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qobs/field.hpp"
#include "qobs/solver.hpp"

namespace qobs {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// "QOBS", u32 version, u32 n, u64 config hash, then the interior coefficients as
/// little-endian doubles in (i, j, k, c) row-major order.
std::vector<unsigned char> encode_checkpoint(const QField& field, std::uint64_t config_hash = 0);

/// Interior values decoded onto a copy of boundary_source (which fixes the grid and
/// the boundary layer). Throws ValidationError on a malformed or mismatched buffer.
QField decode_checkpoint(const std::vector<unsigned char>& bytes, const QField& boundary_source);
/// Grid size stored in a checkpoint header.
int checkpoint_grid_size(const std::vector<unsigned char>& bytes);
std::uint64_t checkpoint_config_hash(const std::vector<unsigned char>& bytes);

void write_checkpoint(const std::string& path, const QField& field, std::uint64_t config_hash = 0);
QField read_checkpoint(const std::string& path, const QField& boundary_source);

/// iter,total,elastic,bulk,grad_norm with the given comment lines ("# ..." prefixed) first.
std::string trace_csv(const std::vector<TraceRow>& trace, const std::vector<std::string>& comments = {});

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);
std::vector<unsigned char> read_bytes(const std::string& path);
/// Pretty-printed with a trailing newline.
void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace qobs
