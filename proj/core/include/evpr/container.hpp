#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "evpr/tensor.hpp"

namespace evpr {

// Shared on-disk container: magic (4 bytes), version u16 LE, header length
// u32 LE, UTF-8 JSON header ({"meta": ..., "tensors": [...]}) with an
// ordered (name, dtype, shape) directory, then the raw little-endian
// payloads back to back in directory order.
enum class Dtype : uint8_t { f32, f64, u8, u16, u32, u64, i32, i64 };

size_t dtype_size(Dtype d);
const char* dtype_name(Dtype d);
Dtype dtype_from_name(const std::string& name);

struct ContainerEntry {
    std::string name;
    Dtype dtype = Dtype::f32;
    Shape shape;
    std::vector<uint8_t> bytes;

    int64_t numel() const { return numel_of(shape); }
};

struct Container {
    std::string magic;       // exactly 4 characters
    uint16_t version = 1;
    std::string meta_json;   // serialized JSON object; empty means {}
    std::vector<ContainerEntry> entries;

    const ContainerEntry* find(const std::string& name) const;
};

void write_container(const std::filesystem::path& path, const Container& c);
Container read_container(const std::filesystem::path& path, const std::string& expected_magic);

// payload conversion helpers
std::vector<uint8_t> f64_to_f32_bytes(const std::vector<double>& v);
std::vector<double> f32_bytes_to_f64(const std::vector<uint8_t>& bytes);

template <typename T>
std::vector<uint8_t> pod_bytes(const std::vector<T>& v) {
    std::vector<uint8_t> out(v.size() * sizeof(T));
    if (!v.empty()) std::memcpy(out.data(), v.data(), out.size());
    return out;
}

template <typename T>
std::vector<T> bytes_to_pod(const std::vector<uint8_t>& bytes) {
    std::vector<T> out(bytes.size() / sizeof(T));
    if (!out.empty()) std::memcpy(out.data(), bytes.data(), bytes.size());
    return out;
}

}  // namespace evpr
