#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "gipsp/phase_space.hpp"

namespace gipsp {

/// Grid description as stored in sidecars: {"axes": [{n, spacing, center}...], "hbar"}.
nlohmann::json grid_to_json(const QGrid& grid, double hbar);
QGrid grid_from_json(const nlohmann::json& j);

/// Raw little-endian buffer `<stem>.bin` plus `<stem>.json` sidecar holding
/// shape, dtype ("float64" or "complex128") and the caller's metadata.
/// float64 is chosen when every imaginary part is exactly zero.
void write_array(const std::filesystem::path& stem, std::span<const cplx> values, const Shape& shape,
                 const nlohmann::json& meta);
/// Returns the values and fills `meta` with the sidecar contents.
CArray read_array(const std::filesystem::path& stem, nlohmann::json& meta);

void write_phase_function(const std::filesystem::path& stem, const PhaseSpaceFunction& f);
PhaseSpaceFunction read_phase_function(const std::filesystem::path& stem);

void write_wavefunction(const std::filesystem::path& stem, const WaveFunction& psi);

/// Two-dimensional (q_0, p_0) slice as CSV with columns q,p,re,im. For 2-D grids
/// the remaining position and momentum indices are fixed at the nodes nearest
/// to `q_fixed` and `p_fixed`.
void write_csv_slice(const std::filesystem::path& file, const PhaseSpaceFunction& f, double q_fixed = 0.0,
                     double p_fixed = 0.0);

} // namespace gipsp
