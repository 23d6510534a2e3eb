#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "rns/tensor.hpp"

namespace rns {

// Little-endian binary primitives shared by the corpus cache ("RNSC") and
// model checkpoint ("RNSM") formats. f64 payloads round-trip bit-exactly.

class BinaryWriter {
public:
    explicit BinaryWriter(std::ostream& out) : out_(out) {}

    void u8(std::uint8_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void i64(std::int64_t v);
    void f64(double v);
    void str(const std::string& s);
    void i32_vec(const std::vector<std::int32_t>& v);
    void f64_vec(const std::vector<double>& v);
    void tensor(const Tensor& t);
    void magic(const char tag[4]);
    void bytes(const std::string& b);

private:
    std::ostream& out_;
};

class BinaryReader {
public:
    explicit BinaryReader(std::istream& in) : in_(in) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    std::int64_t i64();
    double f64();
    std::string str();
    std::vector<std::int32_t> i32_vec();
    std::vector<double> f64_vec();
    Tensor tensor();
    void expect_magic(const char tag[4], const std::string& what);
    std::string bytes(std::size_t n);

private:
    void raw(void* dst, std::size_t n);
    std::istream& in_;
};

// A named, length-prefixed section. Readers can verify names and skip
// unknown sections, which keeps the formats self-describing.
void begin_section(BinaryWriter& w, const std::string& name, const std::string& payload);
std::string read_section(BinaryReader& r, const std::string& expected_name);

}  // namespace rns
