// Application payload codecs: 1-bit images, GPS coordinate pairs, and text
// are converted to and from channel bit-strings ('0'/'1' characters).
//
// Wire layouts (bit-exact, big-endian throughout):
//   image: 16-bit width, 16-bit height, then width*height pixel bits in
//          row-major order (1 = dark).
//   gps:   per coordinate, 1 sign bit (1 = negative) followed by 7 BCD
//          nibbles: 3 integer digits then 4 fractional digits; latitude
//          first, longitude second; 58 bits for the pair.
//   text:  each 8-bit unit expanded most-significant bit first.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace senmux {

class DimensionOverflowError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};
class TruncatedPayloadError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};
class LengthMismatchError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};
class InvalidNibbleError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};
class NonOctetLengthError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};
class CoordinateRangeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};
class PbmFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BitImage {
    // Dimensions above 65535 do not fit the 16-bit header and are rejected.
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<std::uint8_t> pixels; // row-major, one entry per pixel, 0/1

    bool operator==(const BitImage&) const = default;
};

struct GpsCoord {
    double latitude = 0.0;  // |lat| <= 90.0000, 4 fractional digits
    double longitude = 0.0; // |lon| <= 180.0000, 4 fractional digits
};

// Exact comparison at the wire resolution of 1e-4 degrees.
bool same_coordinate(const GpsCoord& a, const GpsCoord& b);

std::string encode_image(const BitImage& img);
BitImage decode_image(const std::string& bits);

std::string encode_gps(const GpsCoord& coord);
GpsCoord decode_gps(const std::string& bits);

std::string encode_text(const std::string& text);
std::string decode_text(const std::string& bits);

// Plain-text portable bitmap (P1) import/export for harness fixtures.
BitImage parse_pbm(const std::string& text);
std::string write_pbm(const BitImage& img);

} // namespace senmux
