#pragma once

#include <atomic>
#include <cstdint>
#include <future>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pario/backend.hpp"
#include "pario/group.hpp"
#include "pario/types.hpp"

namespace pario {

// A process's window onto the file: displacement in bytes plus the elementary
// type. Only contiguous views (filetype == etype) and the "native" data
// representation are supported.
struct FileView {
    FileOffset disp = 0;
    ElementType etype = ElementType::Byte;
    ElementType filetype = ElementType::Byte;
    std::string datarep = "native";

    bool operator==(const FileView&) const = default;
};

namespace detail {

struct RequestState {
    std::future<TransferStatus> fut;
    std::atomic<bool> consumed{false};
};

}  // namespace detail

// Pending nonblocking transfer. wait() returns exactly once; a consumed
// request errors on reuse.
class AccessRequest {
  public:
    AccessRequest() = default;

    TransferStatus wait();
    // Non-blocking poll; returns the status when the transfer is done and
    // consumes the request.
    std::optional<TransferStatus> test();
    bool valid() const { return state_ != nullptr; }

  private:
    friend class File;
    explicit AccessRequest(std::shared_ptr<detail::RequestState> s) : state_(std::move(s)) {}
    std::shared_ptr<detail::RequestState> state_;
};

// An open parallel file. All *_all, *_ordered, open/close/set_* operations
// are collective: every member of the group must call them in the same order.
// A File is confined to one logical thread; background completion of
// nonblocking transfers touches only the backend and the request's own state.
class File {
  public:
    // Collective. Rank 0 makes the creation decision and broadcasts the
    // outcome; then every rank opens a local descriptor. The fresh handle has
    // the default byte view, both pointers at zero, and atomic mode off.
    static File open(Group& group, const std::string& path, int amode,
                     const InfoHints& info = {},
                     Strategy strategy = Strategy::Positional);

    // Non-collective delete; the file must not be open by the group.
    static void remove(const std::string& path, const InfoHints& info = {});

    File(const File&) = delete;
    File& operator=(const File&) = delete;
    File(File&&) = delete;
    File& operator=(File&&) = delete;
    ~File();

    // Collective. Drains outstanding nonblocking requests, flushes, closes the
    // local descriptor; with DELETE_ON_CLOSE rank 0 deletes after the barrier.
    // A second close is a no-op.
    void close();
    bool is_open() const { return open_; }
    std::uint64_t file_id() const { return file_id_; }
    int amode() const { return amode_; }

    // ---- file manipulation --------------------------------------------------

    void set_size(FileOffset bytes);     // collective; truncates or extends
    void preallocate(FileOffset bytes);  // collective; grows to >= bytes
    FileOffset get_size() const;         // local; current size in bytes

    void set_info(const InfoHints& info);  // collective
    InfoHints get_info() const;

    void set_view(FileOffset disp, ElementType etype, ElementType filetype,
                  const std::string& datarep, const InfoHints& info = {});
    FileView get_view() const;

    void set_atomicity(bool flag);  // collective, identical flag on all ranks
    bool get_atomicity() const;

    // Collective. Flushes this process's writes; other processes' flushed
    // updates become visible to subsequent reads through this handle.
    void sync();

    // ---- explicit offsets ---------------------------------------------------

    TransferStatus read_at(FileOffset offset, void* buf, std::int64_t buf_offset,
                           std::int64_t count, ElementType etype);
    TransferStatus write_at(FileOffset offset, const void* buf, std::int64_t buf_offset,
                            std::int64_t count, ElementType etype);
    TransferStatus read_at_all(FileOffset offset, void* buf, std::int64_t buf_offset,
                               std::int64_t count, ElementType etype);
    TransferStatus write_at_all(FileOffset offset, const void* buf, std::int64_t buf_offset,
                                std::int64_t count, ElementType etype);
    AccessRequest iread_at(FileOffset offset, void* buf, std::int64_t buf_offset,
                           std::int64_t count, ElementType etype);
    AccessRequest iwrite_at(FileOffset offset, const void* buf, std::int64_t buf_offset,
                            std::int64_t count, ElementType etype);
    void read_at_all_begin(FileOffset offset, void* buf, std::int64_t buf_offset,
                           std::int64_t count, ElementType etype);
    TransferStatus read_at_all_end(void* buf, std::int64_t buf_offset);
    void write_at_all_begin(FileOffset offset, const void* buf, std::int64_t buf_offset,
                            std::int64_t count, ElementType etype);
    TransferStatus write_at_all_end(const void* buf, std::int64_t buf_offset);

    // ---- individual file pointer --------------------------------------------

    TransferStatus read(void* buf, std::int64_t buf_offset, std::int64_t count,
                        ElementType etype);
    TransferStatus write(const void* buf, std::int64_t buf_offset, std::int64_t count,
                         ElementType etype);
    TransferStatus read_all(void* buf, std::int64_t buf_offset, std::int64_t count,
                            ElementType etype);
    TransferStatus write_all(const void* buf, std::int64_t buf_offset, std::int64_t count,
                             ElementType etype);
    AccessRequest iread(void* buf, std::int64_t buf_offset, std::int64_t count,
                        ElementType etype);
    AccessRequest iwrite(const void* buf, std::int64_t buf_offset, std::int64_t count,
                         ElementType etype);
    void read_all_begin(void* buf, std::int64_t buf_offset, std::int64_t count,
                        ElementType etype);
    TransferStatus read_all_end(void* buf, std::int64_t buf_offset);
    void write_all_begin(const void* buf, std::int64_t buf_offset, std::int64_t count,
                         ElementType etype);
    TransferStatus write_all_end(const void* buf, std::int64_t buf_offset);

    void seek(FileOffset offset, Whence whence);
    FileOffset get_position() const;  // etype units relative to the view
    FileOffset get_byte_offset(FileOffset offset) const;

    // ---- shared file pointer ------------------------------------------------

    TransferStatus read_shared(void* buf, std::int64_t buf_offset, std::int64_t count,
                               ElementType etype);
    TransferStatus write_shared(const void* buf, std::int64_t buf_offset,
                                std::int64_t count, ElementType etype);
    AccessRequest iread_shared(void* buf, std::int64_t buf_offset, std::int64_t count,
                               ElementType etype);
    AccessRequest iwrite_shared(const void* buf, std::int64_t buf_offset,
                                std::int64_t count, ElementType etype);
    TransferStatus read_ordered(void* buf, std::int64_t buf_offset, std::int64_t count,
                                ElementType etype);
    TransferStatus write_ordered(const void* buf, std::int64_t buf_offset,
                                 std::int64_t count, ElementType etype);
    void read_ordered_begin(void* buf, std::int64_t buf_offset, std::int64_t count,
                            ElementType etype);
    TransferStatus read_ordered_end(void* buf, std::int64_t buf_offset);
    void write_ordered_begin(const void* buf, std::int64_t buf_offset, std::int64_t count,
                             ElementType etype);
    TransferStatus write_ordered_end(const void* buf, std::int64_t buf_offset);

    void seek_shared(FileOffset offset, Whence whence);  // collective
    FileOffset get_position_shared() const;

    // ---- typed convenience wrappers -----------------------------------------

    template <typename T>
    TransferStatus read_at(FileOffset offset, std::vector<T>& buf, std::int64_t buf_offset,
                           std::int64_t count) {
        return read_at(offset, buf.data(), buf_offset, count, element_type_of_v<T>);
    }
    template <typename T>
    TransferStatus write_at(FileOffset offset, const std::vector<T>& buf,
                            std::int64_t buf_offset, std::int64_t count) {
        return write_at(offset, buf.data(), buf_offset, count, element_type_of_v<T>);
    }
    template <typename T>
    TransferStatus read(std::vector<T>& buf, std::int64_t buf_offset, std::int64_t count) {
        return read(buf.data(), buf_offset, count, element_type_of_v<T>);
    }
    template <typename T>
    TransferStatus write(const std::vector<T>& buf, std::int64_t buf_offset,
                         std::int64_t count) {
        return write(buf.data(), buf_offset, count, element_type_of_v<T>);
    }

  private:
    enum class SplitKind { AtAll, IndividualAll, Ordered };

    struct PendingSplit {
        SplitKind kind;
        bool write;
        const void* effective_buf;
        std::future<TransferStatus> fut;
    };

    File(Group& group, std::uint64_t file_id, std::string path, int amode, InfoHints info,
         std::unique_ptr<StorageBackend> backend);

    void check_open() const;
    void check_no_split(const char* what) const;
    void check_requests_done(const char* what);
    void check_transfer_args(bool write, const void* buf, FileOffset offset,
                             std::int64_t buf_offset, std::int64_t count,
                             ElementType etype) const;

    std::int64_t extent() const { return extent_of(view_.etype); }
    std::int64_t abs_byte(FileOffset element_offset) const {
        return view_.disp + element_offset * extent();
    }
    // File size in whole etype units visible through the current view.
    std::int64_t size_in_etypes() const;

    TransferStatus transfer(bool write, std::int64_t abs, void* rbuf, const void* wbuf,
                            std::int64_t count, std::int64_t ext);
    std::shared_ptr<detail::RequestState> launch(bool write, std::int64_t abs, void* rbuf,
                                                 const void* wbuf, std::int64_t count,
                                                 std::int64_t ext);
    std::shared_ptr<detail::RequestState> ready_request(TransferStatus st);
    void begin_split(SplitKind kind, bool write, std::int64_t abs, void* rbuf,
                     const void* wbuf, std::int64_t count);
    TransferStatus end_split(SplitKind kind, bool write, const void* buf,
                             std::int64_t buf_offset);
    void prune_requests();

    // Shared-pointer plumbing. Offsets are etype units.
    std::int64_t shared_claim(std::int64_t count);
    std::int64_t shared_get() const;
    void shared_set_rank0(std::int64_t target);
    // Rank order claim for ordered access; returns this rank's start.
    std::int64_t ordered_claim(std::int64_t count);

    Group& group_;
    std::uint64_t file_id_;
    std::string path_;
    int amode_;
    InfoHints info_;
    std::unique_ptr<StorageBackend> backend_;

    FileView view_;
    FileOffset ind_ptr_ = 0;  // etype units
    std::atomic<bool> atomic_mode_{false};
    bool open_ = true;

    std::optional<PendingSplit> pending_split_;
    std::vector<std::shared_ptr<detail::RequestState>> outstanding_;
};

}  // namespace pario
