#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "trwopt/error.hpp"
#include "trwopt/masks.hpp"
#include "trwopt/tensor.hpp"
#include "trwopt/tr_cores.hpp"
#include "trwopt/wopt.hpp"

namespace trwopt {

namespace detail {

inline void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = (unsigned char)(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint64_t get_u64(std::istream& is, const char* what) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8))
        throw io_error(std::string(what) + ": truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return v;
}

inline void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

inline double get_f64(std::istream& is, const char* what) {
    return std::bit_cast<double>(get_u64(is, what));
}

}  // namespace detail

/// Writes one TRT1 record: magic "TRT1", u64 little-endian mode count, the
/// mode sizes, then the values as IEEE-754 little-endian doubles in
/// first-index-fastest order.
inline void write_tensor(std::ostream& os, const DenseTensor& t) {
    if (t.empty()) throw std::invalid_argument("write_tensor: empty tensor");
    detail::check_finite(t.values(), "write_tensor");
    os.write("TRT1", 4);
    detail::put_u64(os, t.order());
    for (std::size_t d : t.dims()) detail::put_u64(os, d);
    for (double v : t.values()) detail::put_f64(os, v);
    if (!os) throw io_error("write_tensor: stream write failed");
}

/// Reads one TRT1 record from the stream, leaving it positioned after the
/// record's payload.
inline DenseTensor read_tensor(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4)) throw io_error("read_tensor: truncated header");
    if (std::string_view(magic, 4) != "TRT1")
        throw io_error("read_tensor: bad magic (not a TRT1 tensor file)");
    const std::uint64_t order = detail::get_u64(is, "read_tensor");
    if (order == 0 || order > 64) throw io_error("read_tensor: implausible mode count");
    std::vector<std::size_t> dims(order);
    std::uint64_t vol = 1;
    for (auto& d : dims) {
        d = detail::get_u64(is, "read_tensor");
        if (d == 0) throw io_error("read_tensor: zero dimension");
        if (vol > (std::uint64_t(1) << 48) / d) throw io_error("read_tensor: implausible size");
        vol *= d;
    }
    std::vector<double> data(vol);
    for (auto& v : data) {
        v = detail::get_f64(is, "read_tensor");
        if (!std::isfinite(v)) throw io_error("read_tensor: non-finite value in payload");
    }
    return DenseTensor::make_unchecked(std::move(dims), std::move(data));
}

inline void write_tensor(const std::filesystem::path& path, const DenseTensor& t) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw io_error("write_tensor: cannot open " + path.string());
    write_tensor(os, t);
}

inline DenseTensor read_tensor(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("read_tensor: cannot open " + path.string());
    DenseTensor t = read_tensor(is);
    if (is.peek() != std::char_traits<char>::eof())
        throw io_error("read_tensor: trailing bytes after tensor record in " + path.string());
    return t;
}

inline void write_mask(const std::filesystem::path& path, const DenseTensor& mask) {
    require_mask(mask, "write_mask");
    write_tensor(path, mask);
}

inline DenseTensor read_mask(const std::filesystem::path& path) {
    DenseTensor mask = read_tensor(path);
    if (!is_binary(mask)) throw io_error("read_mask: non-binary value in " + path.string());
    return mask;
}

/// Ring serialization: one TRT1 record per core, back to back.
inline void write_tr_cores(const std::filesystem::path& path, const TRCores& cores) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw io_error("write_tr_cores: cannot open " + path.string());
    for (std::size_t n = 1; n <= cores.order(); ++n) write_tensor(os, cores.core(n));
}

inline TRCores read_tr_cores(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("read_tr_cores: cannot open " + path.string());
    std::vector<DenseTensor> cores;
    while (is.peek() != std::char_traits<char>::eof()) cores.push_back(read_tensor(is));
    try {
        return TRCores(std::move(cores));
    } catch (const std::invalid_argument& e) {
        throw io_error("read_tr_cores: " + path.string() + " does not hold a valid ring: " +
                       e.what());
    }
}

namespace detail {

// PPM token reader: skips whitespace and '#' comments between header
// fields, and leaves the delimiter after the token unread so the caller can
// account for the single header/payload separator byte.
inline std::string ppm_token(std::istream& is, const char* what) {
    const int eof = std::char_traits<char>::eof();
    int c = is.get();
    while (c != eof) {
        if (c == '#') {
            do c = is.get();
            while (c != eof && c != '\n');
            if (c == eof) break;
        } else if (!std::isspace(c)) {
            break;
        }
        c = is.get();
    }
    if (c == eof) throw io_error(std::string(what) + ": truncated header");
    std::string tok;
    while (c != eof && !std::isspace(c) && c != '#') {
        tok.push_back(char(c));
        c = is.get();
    }
    if (c != eof) is.unget();
    return tok;
}

inline std::size_t ppm_number(std::istream& is, const char* what) {
    const std::string tok = ppm_token(is, what);
    std::size_t value = 0;
    for (char ch : tok) {
        if (ch < '0' || ch > '9')
            throw io_error(std::string(what) + ": malformed header field '" + tok + "'");
        value = value * 10 + std::size_t(ch - '0');
        if (value > (std::size_t(1) << 32)) throw io_error(std::string(what) + ": huge header field");
    }
    if (tok.empty()) throw io_error(std::string(what) + ": empty header field");
    return value;
}

}  // namespace detail

/// Reads a binary (P6) PPM with maxval 255 into a rows x cols x 3 tensor;
/// tensor entry (r, c, ch) is the channel byte of pixel row r, column c.
inline DenseTensor read_ppm(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("read_ppm: cannot open " + path.string());
    if (detail::ppm_token(is, "read_ppm") != "P6")
        throw io_error("read_ppm: not a binary P6 PPM: " + path.string());
    const std::size_t width = detail::ppm_number(is, "read_ppm");
    const std::size_t height = detail::ppm_number(is, "read_ppm");
    const std::size_t maxval = detail::ppm_number(is, "read_ppm");
    if (width == 0 || height == 0) throw io_error("read_ppm: zero image dimension");
    if (maxval != 255) throw io_error("read_ppm: unsupported max value (must be 255)");
    // Exactly one whitespace byte separates the header from the payload.
    const int sep = is.get();
    if (sep == std::char_traits<char>::eof() || !std::isspace(sep))
        throw io_error("read_ppm: missing header/payload separator");

    std::vector<unsigned char> bytes(width * height * 3);
    if (!is.read(reinterpret_cast<char*>(bytes.data()), std::streamsize(bytes.size())))
        throw io_error("read_ppm: truncated pixel payload");

    std::vector<double> data(bytes.size());
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c)
            for (std::size_t ch = 0; ch < 3; ++ch)
                data[r + height * (c + width * ch)] = double(bytes[3 * (r * width + c) + ch]);
    return DenseTensor::make_unchecked({height, width, 3}, std::move(data));
}

/// Writes a rows x cols x 3 tensor as a binary P6 PPM, clipping values to
/// [0, 255] and rounding to the nearest integer (ties away from zero).
inline void write_ppm(const std::filesystem::path& path, const DenseTensor& image) {
    if (image.order() != 3 || image.dims()[2] != 3)
        throw std::invalid_argument("write_ppm: image tensor must be U x V x 3");
    const std::size_t height = image.dims()[0], width = image.dims()[1];
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw io_error("write_ppm: cannot open " + path.string());
    os << "P6\n" << width << " " << height << "\n255\n";
    std::vector<unsigned char> bytes(width * height * 3);
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c)
            for (std::size_t ch = 0; ch < 3; ++ch) {
                double v = image[r + height * (c + width * ch)];
                v = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 255.0);
                bytes[3 * (r * width + c) + ch] = (unsigned char)std::llround(v);
            }
    os.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!os) throw io_error("write_ppm: stream write failed");
}

/// Report JSON: per-iteration trace plus final fit metrics. An infinite
/// PSNR (zero error) is encoded as the string "inf".
inline nlohmann::json report_to_json(const CompletionReport& report, double psnr_value) {
    nlohmann::json iters = nlohmann::json::array();
    for (const IterationRecord& r : report.iterations)
        iters.push_back({{"iter", r.iter}, {"objective", r.objective},
                         {"rel_change", r.rel_change}});
    nlohmann::json final_obj = {{"rse", report.final_rse},
                                {"stop_reason", stop_reason_name(report.stop_reason)}};
    if (std::isfinite(psnr_value))
        final_obj["psnr"] = psnr_value;
    else
        final_obj["psnr"] = "inf";
    return {{"iterations", iters}, {"final", final_obj}};
}

inline void write_report(const std::filesystem::path& path, const CompletionReport& report,
                         double psnr_value) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw io_error("write_report: cannot open " + path.string());
    os << report_to_json(report, psnr_value).dump(2) << '\n';
    if (!os) throw io_error("write_report: stream write failed");
}

}  // namespace trwopt
