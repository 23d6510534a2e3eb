#include "rns/serialize.hpp"

#include <bit>
#include <cstring>

#include "rns/error.hpp"

namespace rns {

void BinaryWriter::u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }

void BinaryWriter::u32(std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out_.write(b, 4);
}

void BinaryWriter::u64(std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out_.write(b, 8);
}

void BinaryWriter::i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }

void BinaryWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void BinaryWriter::i32_vec(const std::vector<std::int32_t>& v) {
    u64(v.size());
    for (std::int32_t x : v) u32(static_cast<std::uint32_t>(x));
}

void BinaryWriter::f64_vec(const std::vector<double>& v) {
    u64(v.size());
    for (double x : v) f64(x);
}

void BinaryWriter::tensor(const Tensor& t) {
    const auto& shape = t.shape();
    u32(static_cast<std::uint32_t>(shape.size()));
    for (int d : shape) u32(static_cast<std::uint32_t>(d));
    auto data = t.data();
    u64(data.size());
    for (double x : data) f64(x);
}

void BinaryWriter::magic(const char tag[4]) { out_.write(tag, 4); }

void BinaryReader::raw(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
        throw IoError("unexpected end of stream while reading binary payload");
}

std::uint8_t BinaryReader::u8() {
    std::uint8_t v;
    raw(&v, 1);
    return v;
}

std::uint32_t BinaryReader::u32() {
    unsigned char b[4];
    raw(b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t BinaryReader::u64() {
    unsigned char b[8];
    raw(b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

std::int64_t BinaryReader::i64() { return static_cast<std::int64_t>(u64()); }

double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

std::string BinaryReader::str() {
    const std::uint32_t n = u32();
    std::string s(n, '\0');
    if (n) raw(s.data(), n);
    return s;
}

std::vector<std::int32_t> BinaryReader::i32_vec() {
    const std::uint64_t n = u64();
    std::vector<std::int32_t> v(n);
    for (std::uint64_t i = 0; i < n; ++i) v[i] = static_cast<std::int32_t>(u32());
    return v;
}

std::vector<double> BinaryReader::f64_vec() {
    const std::uint64_t n = u64();
    std::vector<double> v(n);
    for (std::uint64_t i = 0; i < n; ++i) v[i] = f64();
    return v;
}

Tensor BinaryReader::tensor() {
    const std::uint32_t rank = u32();
    std::vector<int> shape(rank);
    for (std::uint32_t i = 0; i < rank; ++i) shape[i] = static_cast<int>(u32());
    const std::uint64_t n = u64();
    if (n != shape_numel(shape))
        throw IoError("tensor payload length does not match its shape");
    std::vector<double> data(n);
    for (std::uint64_t i = 0; i < n; ++i) data[i] = f64();
    return Tensor(std::move(shape), std::move(data));
}

void BinaryReader::expect_magic(const char tag[4], const std::string& what) {
    char b[4];
    raw(b, 4);
    if (std::memcmp(b, tag, 4) != 0)
        throw IoError("bad magic bytes: not a " + what + " file");
}

void BinaryWriter::bytes(const std::string& b) {
    out_.write(b.data(), static_cast<std::streamsize>(b.size()));
}

std::string BinaryReader::bytes(std::size_t n) {
    std::string b(n, '\0');
    if (n) raw(b.data(), n);
    return b;
}

void begin_section(BinaryWriter& w, const std::string& name, const std::string& payload) {
    w.str(name);
    w.u64(payload.size());
    w.bytes(payload);
}

std::string read_section(BinaryReader& r, const std::string& expected_name) {
    const std::string name = r.str();
    if (name != expected_name)
        throw IoError("expected section '" + expected_name + "', found '" + name + "'");
    const std::uint64_t declared = r.u64();
    return r.bytes(declared);
}

}  // namespace rns
