#include "pario/types.hpp"

namespace pario {

const char* element_type_name(ElementType e) {
    switch (e) {
        case ElementType::Byte: return "byte";
        case ElementType::Int32: return "int32";
        case ElementType::Int64: return "int64";
        case ElementType::Float32: return "float32";
        case ElementType::Float64: return "float64";
    }
    return "?";
}

bool amode_valid(int mask) {
    const int base = mask & (amode::RDONLY | amode::WRONLY | amode::RDWR);
    // exactly one base mode
    if (base == 0 || (base & (base - 1)) != 0) return false;
    if ((mask & amode::RDONLY) && (mask & (amode::CREATE | amode::EXCL))) return false;
    const int known = amode::RDONLY | amode::WRONLY | amode::RDWR | amode::CREATE |
                      amode::EXCL | amode::APPEND | amode::DELETE_ON_CLOSE;
    if (mask & ~known) return false;
    return true;
}

void amode_validate(int mask) {
    if (!amode_valid(mask)) {
        throw IoError(ErrorClass::AccessModeViolation,
                      "invalid access mode mask " + std::to_string(mask));
    }
}

void InfoHints::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

const std::string* InfoHints::get(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) return &v;
    }
    return nullptr;
}

std::string InfoHints::serialize() const {
    std::string out;
    for (const auto& [k, v] : entries_) {
        out += std::to_string(k.size());
        out += ':';
        out += k;
        out += '=';
        out += std::to_string(v.size());
        out += ':';
        out += v;
        out += ';';
    }
    return out;
}

const char* error_class_name(ErrorClass c) {
    switch (c) {
        case ErrorClass::NoSuchFile: return "NoSuchFile";
        case ErrorClass::AccessModeViolation: return "AccessModeViolation";
        case ErrorClass::BadOffset: return "BadOffset";
        case ErrorClass::UnsupportedView: return "UnsupportedView";
        case ErrorClass::PendingSplitCollective: return "PendingSplitCollective";
        case ErrorClass::HandleClosed: return "HandleClosed";
        case ErrorClass::GroupMismatch: return "GroupMismatch";
        case ErrorClass::CoordinatorFailure: return "CoordinatorFailure";
        case ErrorClass::BackendFailure: return "BackendFailure";
    }
    return "IoError";
}

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed) {
    std::uint64_t h = seed;
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t seed) {
    return fnv1a(s.data(), s.size(), seed);
}

}  // namespace pario
