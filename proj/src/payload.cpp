#include "senmux/payload.hpp"

#include <cmath>

namespace senmux {

namespace {

void require_bits(const std::string& bits) {
    for (char c : bits) {
        if (c != '0' && c != '1')
            throw std::invalid_argument("bit-string may only contain '0' and '1'");
    }
}

void append_uint(std::string& out, std::uint64_t value, int bit_count) {
    for (int i = bit_count - 1; i >= 0; --i)
        out.push_back((value >> i) & 1 ? '1' : '0');
}

std::uint64_t read_uint(const std::string& bits, std::size_t offset, int bit_count) {
    std::uint64_t value = 0;
    for (int i = 0; i < bit_count; ++i)
        value = (value << 1) | (bits[offset + i] == '1' ? 1u : 0u);
    return value;
}

constexpr std::int64_t kLatLimit = 900000;  // 90.0000 scaled by 1e4
constexpr std::int64_t kLonLimit = 1800000; // 180.0000 scaled by 1e4

std::int64_t scale_coordinate(double degrees, std::int64_t limit) {
    std::int64_t scaled = std::llround(degrees * 1e4);
    if (scaled < -limit || scaled > limit)
        throw CoordinateRangeError("coordinate outside the representable range");
    return scaled;
}

// 1 sign bit + 7 BCD digit nibbles (3 integer, 4 fractional), 29 bits.
void append_coordinate(std::string& out, std::int64_t scaled) {
    out.push_back(scaled < 0 ? '1' : '0');
    std::uint64_t magnitude = static_cast<std::uint64_t>(scaled < 0 ? -scaled : scaled);
    std::uint64_t divisor = 1'000'000;
    for (int digit = 0; digit < 7; ++digit) {
        append_uint(out, (magnitude / divisor) % 10, 4);
        divisor /= 10;
    }
}

std::int64_t read_coordinate(const std::string& bits, std::size_t offset, std::int64_t limit) {
    bool negative = bits[offset] == '1';
    std::uint64_t magnitude = 0;
    for (int digit = 0; digit < 7; ++digit) {
        std::uint64_t nibble = read_uint(bits, offset + 1 + 4 * digit, 4);
        if (nibble > 9)
            throw InvalidNibbleError("coordinate digit nibble exceeds 9");
        magnitude = magnitude * 10 + nibble;
    }
    std::int64_t scaled = negative ? -static_cast<std::int64_t>(magnitude)
                                   : static_cast<std::int64_t>(magnitude);
    if (scaled < -limit || scaled > limit)
        throw CoordinateRangeError("decoded coordinate outside the representable range");
    return scaled;
}

} // namespace

bool same_coordinate(const GpsCoord& a, const GpsCoord& b) {
    return std::llround(a.latitude * 1e4) == std::llround(b.latitude * 1e4) &&
           std::llround(a.longitude * 1e4) == std::llround(b.longitude * 1e4);
}

std::string encode_image(const BitImage& img) {
    if (img.width > 65535 || img.height > 65535)
        throw DimensionOverflowError("image dimensions exceed 16-bit limits");
    std::uint64_t expected = static_cast<std::uint64_t>(img.width) * img.height;
    if (img.pixels.size() != expected)
        throw LengthMismatchError("pixel count does not match width*height");
    std::string bits;
    bits.reserve(32 + img.pixels.size());
    append_uint(bits, img.width, 16);
    append_uint(bits, img.height, 16);
    for (std::uint8_t px : img.pixels)
        bits.push_back(px ? '1' : '0');
    return bits;
}

BitImage decode_image(const std::string& bits) {
    require_bits(bits);
    if (bits.size() < 32)
        throw TruncatedPayloadError("image payload shorter than its 32-bit header");
    BitImage img;
    img.width = static_cast<std::uint32_t>(read_uint(bits, 0, 16));
    img.height = static_cast<std::uint32_t>(read_uint(bits, 16, 16));
    std::uint64_t expected = static_cast<std::uint64_t>(img.width) * img.height;
    if (bits.size() - 32 != expected)
        throw LengthMismatchError("pixel bits do not match the header dimensions");
    img.pixels.reserve(expected);
    for (std::size_t i = 32; i < bits.size(); ++i)
        img.pixels.push_back(bits[i] == '1' ? 1 : 0);
    return img;
}

std::string encode_gps(const GpsCoord& coord) {
    std::string bits;
    bits.reserve(58);
    append_coordinate(bits, scale_coordinate(coord.latitude, kLatLimit));
    append_coordinate(bits, scale_coordinate(coord.longitude, kLonLimit));
    return bits;
}

GpsCoord decode_gps(const std::string& bits) {
    require_bits(bits);
    if (bits.size() < 58)
        throw TruncatedPayloadError("coordinate payload shorter than 58 bits");
    if (bits.size() > 58)
        throw LengthMismatchError("coordinate payload longer than 58 bits");
    GpsCoord coord;
    coord.latitude = static_cast<double>(read_coordinate(bits, 0, kLatLimit)) / 1e4;
    coord.longitude = static_cast<double>(read_coordinate(bits, 29, kLonLimit)) / 1e4;
    return coord;
}

std::string encode_text(const std::string& text) {
    std::string bits;
    bits.reserve(text.size() * 8);
    for (unsigned char byte : text)
        append_uint(bits, byte, 8);
    return bits;
}

std::string decode_text(const std::string& bits) {
    require_bits(bits);
    if (bits.size() % 8 != 0)
        throw NonOctetLengthError("text payload length is not a multiple of 8");
    std::string text;
    text.reserve(bits.size() / 8);
    for (std::size_t i = 0; i < bits.size(); i += 8)
        text.push_back(static_cast<char>(read_uint(bits, i, 8)));
    return text;
}

namespace {

struct PbmCursor {
    const std::string& text;
    std::size_t pos = 0;

    void skip_separators() {
        while (pos < text.size()) {
            char c = text[pos];
            if (c == '#') {
                while (pos < text.size() && text[pos] != '\n')
                    ++pos;
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
                       c == '\v') {
                ++pos;
            } else {
                break;
            }
        }
    }

    std::uint64_t read_number() {
        skip_separators();
        if (pos >= text.size() || text[pos] < '0' || text[pos] > '9')
            throw PbmFormatError("expected a decimal number in bitmap header");
        std::uint64_t value = 0;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            value = value * 10 + static_cast<std::uint64_t>(text[pos] - '0');
            if (value > 10'000'000)
                throw PbmFormatError("bitmap dimension is implausibly large");
            ++pos;
        }
        return value;
    }
};

} // namespace

BitImage parse_pbm(const std::string& text) {
    PbmCursor cur{text};
    cur.skip_separators();
    if (cur.pos + 2 > text.size() || text[cur.pos] != 'P' || text[cur.pos + 1] != '1')
        throw PbmFormatError("missing P1 bitmap magic");
    cur.pos += 2;
    std::uint64_t width = cur.read_number();
    std::uint64_t height = cur.read_number();
    if (width > 65535 || height > 65535)
        throw DimensionOverflowError("bitmap dimensions exceed 16-bit limits");
    BitImage img;
    img.width = static_cast<std::uint32_t>(width);
    img.height = static_cast<std::uint32_t>(height);
    img.pixels.reserve(width * height);
    for (std::uint64_t i = 0; i < width * height; ++i) {
        cur.skip_separators();
        if (cur.pos >= text.size())
            throw PbmFormatError("bitmap ends before all pixels were read");
        char c = text[cur.pos++];
        if (c != '0' && c != '1')
            throw PbmFormatError("bitmap pixels must be 0 or 1");
        img.pixels.push_back(c == '1' ? 1 : 0);
    }
    return img;
}

std::string write_pbm(const BitImage& img) {
    std::uint64_t expected = static_cast<std::uint64_t>(img.width) * img.height;
    if (img.pixels.size() != expected)
        throw LengthMismatchError("pixel count does not match width*height");
    std::string out = "P1\n";
    out += std::to_string(img.width);
    out += ' ';
    out += std::to_string(img.height);
    out += '\n';
    for (std::uint32_t y = 0; y < img.height; ++y) {
        for (std::uint32_t x = 0; x < img.width; ++x)
            out.push_back(img.pixels[static_cast<std::size_t>(y) * img.width + x] ? '1' : '0');
        out.push_back('\n');
    }
    return out;
}

} // namespace senmux
