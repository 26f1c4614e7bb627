#include "evpr/container.hpp"

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "evpr/errors.hpp"

namespace evpr {

using nlohmann::json;

size_t dtype_size(Dtype d) {
    switch (d) {
        case Dtype::u8: return 1;
        case Dtype::u16: return 2;
        case Dtype::f32:
        case Dtype::u32:
        case Dtype::i32: return 4;
        case Dtype::f64:
        case Dtype::u64:
        case Dtype::i64: return 8;
    }
    throw ConfigError("unknown dtype");
}

const char* dtype_name(Dtype d) {
    switch (d) {
        case Dtype::f32: return "f32";
        case Dtype::f64: return "f64";
        case Dtype::u8: return "u8";
        case Dtype::u16: return "u16";
        case Dtype::u32: return "u32";
        case Dtype::u64: return "u64";
        case Dtype::i32: return "i32";
        case Dtype::i64: return "i64";
    }
    throw ConfigError("unknown dtype");
}

Dtype dtype_from_name(const std::string& name) {
    if (name == "f32") return Dtype::f32;
    if (name == "f64") return Dtype::f64;
    if (name == "u8") return Dtype::u8;
    if (name == "u16") return Dtype::u16;
    if (name == "u32") return Dtype::u32;
    if (name == "u64") return Dtype::u64;
    if (name == "i32") return Dtype::i32;
    if (name == "i64") return Dtype::i64;
    throw ParseError("unknown dtype '" + name + "' in container header");
}

const ContainerEntry* Container::find(const std::string& name) const {
    for (const auto& e : entries) {
        if (e.name == name) return &e;
    }
    return nullptr;
}

void write_container(const std::filesystem::path& path, const Container& c) {
    if (c.magic.size() != 4) throw ConfigError("container magic must be 4 characters");

    json header;
    header["meta"] = c.meta_json.empty() ? json::object() : json::parse(c.meta_json);
    json dir = json::array();
    for (const auto& e : c.entries) {
        const size_t expect = static_cast<size_t>(e.numel()) * dtype_size(e.dtype);
        if (e.bytes.size() != expect) {
            throw ConfigError("container entry '" + e.name + "': payload is " +
                              std::to_string(e.bytes.size()) + " bytes, shape implies " +
                              std::to_string(expect));
        }
        dir.push_back({{"name", e.name}, {"dtype", dtype_name(e.dtype)}, {"shape", e.shape}});
    }
    header["tensors"] = dir;
    const std::string hs = header.dump();
    if (hs.size() > 0xffffffffull) throw ConfigError("container header too large");

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f.write(c.magic.data(), 4);
    const uint16_t ver = c.version;
    char v16[2] = {static_cast<char>(ver & 0xff), static_cast<char>((ver >> 8) & 0xff)};
    f.write(v16, 2);
    const uint32_t hlen = static_cast<uint32_t>(hs.size());
    char v32[4];
    for (int i = 0; i < 4; ++i) v32[i] = static_cast<char>((hlen >> (8 * i)) & 0xff);
    f.write(v32, 4);
    f.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const auto& e : c.entries) {
        f.write(reinterpret_cast<const char*>(e.bytes.data()), static_cast<std::streamsize>(e.bytes.size()));
    }
    if (!f) throw IoError("short write to " + path.string());
}

Container read_container(const std::filesystem::path& path, const std::string& expected_magic) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    if (data.size() < 10) throw ParseError(path.string() + ": truncated container header (byte offset 0)");
    Container c;
    c.magic = data.substr(0, 4);
    if (c.magic != expected_magic) {
        throw ParseError(path.string() + ": bad magic '" + c.magic + "', expected '" + expected_magic +
                         "' at byte offset 0");
    }
    const auto* p = reinterpret_cast<const unsigned char*>(data.data());
    c.version = static_cast<uint16_t>(p[4] | (static_cast<uint16_t>(p[5]) << 8));
    uint32_t hlen = 0;
    for (int i = 3; i >= 0; --i) hlen = (hlen << 8) | p[6 + i];
    if (data.size() < 10 + static_cast<size_t>(hlen)) {
        throw ParseError(path.string() + ": header length " + std::to_string(hlen) +
                         " exceeds file size (byte offset 6)");
    }

    json header;
    try {
        header = json::parse(data.substr(10, hlen));
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": invalid JSON header: " + e.what());
    }
    c.meta_json = header.value("meta", json::object()).dump();

    size_t offset = 10 + hlen;
    for (const auto& t : header.value("tensors", json::array())) {
        ContainerEntry e;
        e.name = t.at("name").get<std::string>();
        e.dtype = dtype_from_name(t.at("dtype").get<std::string>());
        e.shape = t.at("shape").get<Shape>();
        const size_t nbytes = static_cast<size_t>(e.numel()) * dtype_size(e.dtype);
        if (offset + nbytes > data.size()) {
            throw ParseError(path.string() + ": payload for '" + e.name + "' truncated at byte offset " +
                             std::to_string(offset));
        }
        e.bytes.assign(data.begin() + static_cast<ptrdiff_t>(offset),
                       data.begin() + static_cast<ptrdiff_t>(offset + nbytes));
        offset += nbytes;
        c.entries.push_back(std::move(e));
    }
    if (offset != data.size()) {
        throw ParseError(path.string() + ": " + std::to_string(data.size() - offset) +
                         " trailing bytes after declared payloads");
    }
    return c;
}

std::vector<uint8_t> f64_to_f32_bytes(const std::vector<double>& v) {
    std::vector<uint8_t> out(v.size() * 4);
    for (size_t i = 0; i < v.size(); ++i) {
        const float x = static_cast<float>(v[i]);
        std::memcpy(out.data() + i * 4, &x, 4);
    }
    return out;
}

std::vector<double> f32_bytes_to_f64(const std::vector<uint8_t>& bytes) {
    std::vector<double> out(bytes.size() / 4);
    for (size_t i = 0; i < out.size(); ++i) {
        float x;
        std::memcpy(&x, bytes.data() + i * 4, 4);
        out[i] = static_cast<double>(x);
    }
    return out;
}

}  // namespace evpr
