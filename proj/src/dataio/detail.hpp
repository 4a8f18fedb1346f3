#pragma once

#include <cstdint>
#include <optional>
#include <span>

namespace spoofbench::dataio {

double wav_header_duration(std::span<const std::uint8_t> bytes);

// nullopt when STREAMINFO leaves the total sample count unset.
std::optional<double> flac_header_duration(std::span<const std::uint8_t> bytes);

}  // namespace spoofbench::dataio
