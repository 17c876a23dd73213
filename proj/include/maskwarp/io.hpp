#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "maskwarp/image.hpp"
#include "maskwarp/interest.hpp"
#include "maskwarp/warp_field.hpp"

namespace maskwarp {

using Rgb = std::array<std::uint8_t, 3>;
using LabelColors = std::map<Rgb, std::uint32_t>;

// 8-bit PNG. Grey and grey+alpha load as one channel, everything else as
// RGB; alpha is dropped and 16-bit samples are reduced to 8 bits.
ImageBuffer read_image(const std::filesystem::path& path);
// Samples are clamped to [0,1] and rounded to the nearest 8-bit level.
void write_image(const std::filesystem::path& path, const ImageBuffer& image);

// Mask pixels are 1 where the grey level (Rec. 601 luma for colour files)
// is at least 128.
BinaryMask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const BinaryMask& mask);

// Colours missing from the table are an error, except black, which maps to
// the background label 0.
LabelMask read_labels(const std::filesystem::path& path, const LabelColors& colors);

// WFLD: "WFLD", u32 version 1, u32 height, u32 width, then (dx, dy) f32
// pairs row-major. All integers and floats little-endian.
void write_field(std::ostream& out, const WarpField& field);
// Rounds every displacement to the nearest f32, i.e. what a WFLD file keeps.
WarpField round_to_f32(const WarpField& field);
WarpField read_field(std::istream& in);
void write_field(const std::filesystem::path& path, const WarpField& field);
WarpField read_field(const std::filesystem::path& path);

// SPHD: "SPHD", u32 version 1, u32 hc, wc, C_p, C_d, cell_size, then the
// point head and the descriptor head as f32, row-major channel-last.
void write_heads(std::ostream& out, const InterestHeads& heads);
InterestHeads read_heads(std::istream& in);
void write_heads(const std::filesystem::path& path, const InterestHeads& heads);
InterestHeads read_heads(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace maskwarp
