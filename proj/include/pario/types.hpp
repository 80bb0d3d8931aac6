#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pario {

// Offsets and sizes are signed 64-bit throughout. Depending on context the
// unit is etype elements (view-relative positions, transfer counts) or bytes
// (displacements, file sizes). Negative values are input errors everywhere.
using FileOffset = std::int64_t;

enum class ElementType : std::uint8_t {
    Byte = 0,
    Int32,
    Int64,
    Float32,
    Float64,
};

// Bytes per element; fixed per kind.
constexpr std::int64_t extent_of(ElementType e) {
    switch (e) {
        case ElementType::Byte: return 1;
        case ElementType::Int32: return 4;
        case ElementType::Int64: return 8;
        case ElementType::Float32: return 4;
        case ElementType::Float64: return 8;
    }
    return 1;
}

const char* element_type_name(ElementType e);

// Maps buffer element types onto the wire-level ElementType tags.
template <typename T>
struct element_type_of;
template <> struct element_type_of<std::uint8_t> {
    static constexpr ElementType value = ElementType::Byte;
};
template <> struct element_type_of<std::int32_t> {
    static constexpr ElementType value = ElementType::Int32;
};
template <> struct element_type_of<std::int64_t> {
    static constexpr ElementType value = ElementType::Int64;
};
template <> struct element_type_of<float> {
    static constexpr ElementType value = ElementType::Float32;
};
template <> struct element_type_of<double> {
    static constexpr ElementType value = ElementType::Float64;
};
template <typename T>
constexpr ElementType element_type_of_v = element_type_of<T>::value;

// File access mode bits. Exactly one of RDONLY/WRONLY/RDWR must be set;
// RDONLY excludes CREATE and EXCL.
namespace amode {
constexpr int RDONLY = 0x01;
constexpr int WRONLY = 0x02;
constexpr int RDWR = 0x04;
constexpr int CREATE = 0x08;
constexpr int EXCL = 0x10;
constexpr int APPEND = 0x20;
constexpr int DELETE_ON_CLOSE = 0x40;
}  // namespace amode

bool amode_valid(int mask);
// Throws IoError{AccessModeViolation} if the mask is malformed.
void amode_validate(int mask);
inline bool amode_readable(int mask) { return mask & (amode::RDONLY | amode::RDWR); }
inline bool amode_writable(int mask) { return mask & (amode::WRONLY | amode::RDWR); }

// Count of etype elements actually transferred by a data-access operation.
// count < requested only when end-of-file truncates a read.
struct TransferStatus {
    std::int64_t count = 0;
};

// Ordered string key/value hints. Keys are unique; setting an existing key
// replaces its value in place. Unrecognized keys are retained verbatim.
class InfoHints {
  public:
    InfoHints() = default;

    void set(const std::string& key, const std::string& value);
    const std::string* get(const std::string& key) const;
    bool contains(const std::string& key) const { return get(key) != nullptr; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    const std::vector<std::pair<std::string, std::string>>& entries() const {
        return entries_;
    }

    // Stable serialization, used for collective-agreement digests.
    std::string serialize() const;

  private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

enum class ErrorClass : std::uint8_t {
    NoSuchFile = 0,
    AccessModeViolation = 1,
    BadOffset = 2,
    UnsupportedView = 3,
    PendingSplitCollective = 4,
    HandleClosed = 5,
    GroupMismatch = 6,
    CoordinatorFailure = 7,
    BackendFailure = 8,
};

const char* error_class_name(ErrorClass c);

class IoError : public std::runtime_error {
  public:
    IoError(ErrorClass cls, const std::string& detail)
        : std::runtime_error(std::string(error_class_name(cls)) + ": " + detail),
          cls_(cls) {}

    ErrorClass cls() const { return cls_; }

  private:
    ErrorClass cls_;
};

enum class Whence { Set, Cur, End };

// FNV-1a, used for collective-argument agreement digests.
std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ull);
std::uint64_t fnv1a(const std::string& s, std::uint64_t seed = 0xcbf29ce484222325ull);

}  // namespace pario
