#include "pario/file.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>

#include "pario/wire.hpp"

namespace pario {

namespace {

std::uint64_t digest_i64(std::uint64_t d, std::int64_t v) {
    return fnv1a(&v, sizeof(v), d);
}

// Position-independent claim of [old, old+count) from the shared counter is
// the serialization point for all shared-pointer access.
constexpr std::uint8_t kSharedCounter = counters::kSharedPointer;

struct RangeLockGuard {
    Group* group = nullptr;
    std::uint64_t token = 0;

    RangeLockGuard() = default;
    RangeLockGuard(Group& g, std::uint64_t file_id, std::int64_t start, std::int64_t end)
        : group(&g) {
        token = g.range_lock(file_id, static_cast<std::uint64_t>(start),
                             static_cast<std::uint64_t>(end));
    }
    RangeLockGuard(const RangeLockGuard&) = delete;
    RangeLockGuard& operator=(const RangeLockGuard&) = delete;
    ~RangeLockGuard() {
        if (group) {
            try {
                group->range_unlock(token);
            } catch (...) {
            }
        }
    }
};

}  // namespace

TransferStatus AccessRequest::wait() {
    if (!state_) throw IoError(ErrorClass::HandleClosed, "empty request");
    if (state_->consumed.exchange(true)) {
        throw IoError(ErrorClass::HandleClosed, "request already consumed");
    }
    return state_->fut.get();
}

std::optional<TransferStatus> AccessRequest::test() {
    if (!state_) throw IoError(ErrorClass::HandleClosed, "empty request");
    if (state_->consumed.load()) {
        throw IoError(ErrorClass::HandleClosed, "request already consumed");
    }
    if (state_->fut.wait_for(std::chrono::seconds(0)) != std::future_status::ready) {
        return std::nullopt;
    }
    state_->consumed.store(true);
    return state_->fut.get();
}

File::File(Group& group, std::uint64_t file_id, std::string path, int amode, InfoHints info,
           std::unique_ptr<StorageBackend> backend)
    : group_(group),
      file_id_(file_id),
      path_(std::move(path)),
      amode_(amode),
      info_(std::move(info)),
      backend_(std::move(backend)) {}

File::~File() {
    // Not a collective close: just drain background transfers and release the
    // descriptor so helper threads never outlive the handle.
    for (auto& st : outstanding_) {
        if (!st->consumed.exchange(true)) {
            try {
                st->fut.get();
            } catch (...) {
            }
        }
    }
    if (pending_split_) {
        try {
            pending_split_->fut.get();
        } catch (...) {
        }
    }
    if (backend_) backend_->close();
}

File File::open(Group& group, const std::string& path, int amode, const InfoHints& info,
                Strategy strategy) {
    std::uint64_t d = fnv1a("fileOpen");
    d = fnv1a(path, d);
    d = digest_i64(d, amode);
    d = digest_i64(d, static_cast<std::int64_t>(strategy));
    group.agree(d, "fileOpen");
    amode_validate(amode);

    // Rank 0 makes the existence/creation decision, everyone learns the
    // outcome bit-exactly.
    std::vector<std::uint8_t> verdict;
    if (group.rank() == 0) {
        verdict.push_back(0xFF);
        try {
            std::error_code ec;
            bool exists = std::filesystem::exists(path, ec);
            if (amode & amode::CREATE) {
                if (exists && (amode & amode::EXCL)) {
                    throw IoError(ErrorClass::BackendFailure,
                                  "file exists and EXCL was requested: " + path);
                }
                if (!exists) {
                    int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_EXCL, 0644);
                    if (fd < 0) {
                        throw IoError(ErrorClass::BackendFailure,
                                      "cannot create '" + path + "': " + std::strerror(errno));
                    }
                    ::close(fd);
                }
            } else if (!exists) {
                throw IoError(ErrorClass::NoSuchFile, "no such file: " + path);
            }
        } catch (const IoError& e) {
            verdict.clear();
            verdict.push_back(static_cast<std::uint8_t>(e.cls()));
            const char* msg = e.what();
            verdict.insert(verdict.end(), msg, msg + std::strlen(msg));
        }
    }
    auto outcome = group.broadcast(0, verdict);
    if (outcome.empty()) {
        throw IoError(ErrorClass::CoordinatorFailure, "empty open verdict");
    }
    if (outcome[0] != 0xFF) {
        throw IoError(static_cast<ErrorClass>(outcome[0]),
                      std::string(outcome.begin() + 1, outcome.end()));
    }

    std::uint64_t file_id = group.register_open(path);
    // The file exists now; CREATE/EXCL were rank 0's business.
    int local_amode = amode & ~(amode::CREATE | amode::EXCL);
    auto backend = backend_open(path, local_amode, strategy);
    return File(group, file_id, path, amode, info, std::move(backend));
}

void File::remove(const std::string& path, const InfoHints&) {
    std::error_code ec;
    if (!std::filesystem::remove(path, ec)) {
        if (ec) {
            throw IoError(ErrorClass::BackendFailure,
                          "delete '" + path + "': " + ec.message());
        }
        throw IoError(ErrorClass::NoSuchFile, "no such file: " + path);
    }
}

void File::close() {
    if (!open_) return;  // a second close is tolerated
    if (pending_split_) {
        throw IoError(ErrorClass::PendingSplitCollective,
                      "close with an outstanding split collective");
    }
    // Complete abandoned nonblocking requests before tearing down.
    for (auto& st : outstanding_) {
        if (!st->consumed.exchange(true)) {
            try {
                st->fut.get();
            } catch (...) {
            }
        }
    }
    outstanding_.clear();
    if (amode_writable(amode_)) backend_->flush();
    backend_->close();
    open_ = false;
    group_.barrier();
    if (amode_ & amode::DELETE_ON_CLOSE) {
        if (group_.rank() == 0) {
            std::error_code ec;
            std::filesystem::remove(path_, ec);
        }
        group_.barrier();
    }
}

void File::check_open() const {
    if (!open_) throw IoError(ErrorClass::HandleClosed, "file handle is closed");
}

void File::check_no_split(const char* what) const {
    if (pending_split_) {
        throw IoError(ErrorClass::PendingSplitCollective,
                      std::string(what) + " with an outstanding split collective");
    }
}

void File::check_requests_done(const char* what) {
    prune_requests();
    if (!outstanding_.empty()) {
        throw IoError(ErrorClass::PendingSplitCollective,
                      std::string(what) + " with uncompleted nonblocking requests");
    }
}

void File::prune_requests() {
    std::erase_if(outstanding_, [](const std::shared_ptr<detail::RequestState>& st) {
        return st->consumed.load();
    });
}

// ---- file manipulation ------------------------------------------------------

void File::set_size(FileOffset bytes) {
    check_open();
    check_no_split("set_size");
    std::uint64_t d = digest_i64(fnv1a("setSize"), bytes);
    group_.agree(d, "setSize");
    if (bytes < 0) throw IoError(ErrorClass::BadOffset, "negative file size");
    if (!amode_writable(amode_)) {
        throw IoError(ErrorClass::AccessModeViolation, "set_size requires write access");
    }
    if (group_.rank() == 0) backend_->truncate(bytes);
    group_.barrier();
    backend_->on_size_changed();
}

void File::preallocate(FileOffset bytes) {
    check_open();
    check_no_split("preallocate");
    std::uint64_t d = digest_i64(fnv1a("preallocate"), bytes);
    group_.agree(d, "preallocate");
    if (bytes < 0) throw IoError(ErrorClass::BadOffset, "negative preallocation size");
    if (!amode_writable(amode_)) {
        throw IoError(ErrorClass::AccessModeViolation, "preallocate requires write access");
    }
    if (group_.rank() == 0) backend_->ensure_size(bytes);
    group_.barrier();
    backend_->on_size_changed();
}

FileOffset File::get_size() const {
    check_open();
    return backend_->size();
}

void File::set_info(const InfoHints& info) {
    check_open();
    group_.agree(fnv1a(info.serialize(), fnv1a("setInfo")), "setInfo");
    for (const auto& [k, v] : info.entries()) info_.set(k, v);
}

InfoHints File::get_info() const {
    check_open();
    return info_;
}

void File::set_view(FileOffset disp, ElementType etype, ElementType filetype,
                    const std::string& datarep, const InfoHints& info) {
    check_open();
    check_no_split("set_view");
    std::uint64_t d = fnv1a("setView");
    d = digest_i64(d, disp);
    d = digest_i64(d, static_cast<std::int64_t>(etype));
    d = digest_i64(d, static_cast<std::int64_t>(filetype));
    d = fnv1a(datarep, d);
    d = fnv1a(info.serialize(), d);
    group_.agree(d, "setView");
    if (filetype != etype) {
        throw IoError(ErrorClass::UnsupportedView,
                      "only contiguous views are supported (filetype must equal etype)");
    }
    if (datarep != "native") {
        throw IoError(ErrorClass::UnsupportedView,
                      "unsupported data representation '" + datarep + "'");
    }
    if (disp < 0) throw IoError(ErrorClass::BadOffset, "negative view displacement");
    view_ = FileView{disp, etype, filetype, datarep};
    ind_ptr_ = 0;
    // Collective reset of the shared pointer.
    if (group_.rank() == 0) shared_set_rank0(0);
    group_.barrier();
}

FileView File::get_view() const {
    check_open();
    return view_;
}

void File::set_atomicity(bool flag) {
    check_open();
    group_.agree(digest_i64(fnv1a("setAtomicity"), flag ? 1 : 0), "setAtomicity");
    atomic_mode_.store(flag);
}

bool File::get_atomicity() const {
    check_open();
    return atomic_mode_.load();
}

void File::sync() {
    check_open();
    check_no_split("sync");
    check_requests_done("sync");
    group_.barrier();
    backend_->flush();
}

// ---- transfer engine --------------------------------------------------------

void File::check_transfer_args(bool write, const void* buf, FileOffset offset,
                               std::int64_t buf_offset, std::int64_t count,
                               ElementType etype) const {
    check_open();
    if (write && !amode_writable(amode_)) {
        throw IoError(ErrorClass::AccessModeViolation, "file not open for writing");
    }
    if (!write && !amode_readable(amode_)) {
        throw IoError(ErrorClass::AccessModeViolation, "file not open for reading");
    }
    if (etype != view_.etype) {
        throw IoError(ErrorClass::UnsupportedView,
                      std::string("transfer etype ") + element_type_name(etype) +
                          " does not match view etype " + element_type_name(view_.etype));
    }
    if (offset < 0 || buf_offset < 0 || count < 0) {
        throw IoError(ErrorClass::BadOffset, "negative offset or count");
    }
    if (count > 0 && buf == nullptr) {
        throw IoError(ErrorClass::BadOffset, "null buffer with nonzero count");
    }
}

TransferStatus File::transfer(bool write, std::int64_t abs, void* rbuf, const void* wbuf,
                              std::int64_t count, std::int64_t ext) {
    if (count == 0) return {0};
    const std::int64_t nbytes = count * ext;
    // In atomic mode the byte range is coordinator-locked for the duration of
    // the transfer, and writes are flushed before the lock is released.
    std::optional<RangeLockGuard> lock;
    if (atomic_mode_.load()) lock.emplace(group_, file_id_, abs, abs + nbytes);
    if (write) {
        backend_->pwrite(abs, wbuf, static_cast<std::size_t>(nbytes));
        if (lock) backend_->flush();
        return {count};
    }
    std::size_t got = backend_->pread(abs, rbuf, static_cast<std::size_t>(nbytes));
    return {static_cast<std::int64_t>(got) / ext};
}

std::shared_ptr<detail::RequestState> File::launch(bool write, std::int64_t abs, void* rbuf,
                                                   const void* wbuf, std::int64_t count,
                                                   std::int64_t ext) {
    auto st = std::make_shared<detail::RequestState>();
    if (count == 0) {
        std::promise<TransferStatus> p;
        p.set_value({0});
        st->fut = p.get_future();
    } else {
        st->fut = std::async(std::launch::async, [this, write, abs, rbuf, wbuf, count, ext] {
            return transfer(write, abs, rbuf, wbuf, count, ext);
        });
    }
    outstanding_.push_back(st);
    return st;
}

std::shared_ptr<detail::RequestState> File::ready_request(TransferStatus s) {
    auto st = std::make_shared<detail::RequestState>();
    std::promise<TransferStatus> p;
    p.set_value(s);
    st->fut = p.get_future();
    outstanding_.push_back(st);
    return st;
}

// ---- explicit offsets --------------------------------------------------------

TransferStatus File::read_at(FileOffset offset, void* buf, std::int64_t buf_offset,
                             std::int64_t count, ElementType etype) {
    check_transfer_args(false, buf, offset, buf_offset, count, etype);
    auto* dst = static_cast<std::uint8_t*>(buf) + buf_offset * extent();
    return transfer(false, abs_byte(offset), dst, nullptr, count, extent());
}

TransferStatus File::write_at(FileOffset offset, const void* buf, std::int64_t buf_offset,
                              std::int64_t count, ElementType etype) {
    check_transfer_args(true, buf, offset, buf_offset, count, etype);
    const auto* src = static_cast<const std::uint8_t*>(buf) + buf_offset * extent();
    return transfer(true, abs_byte(offset), nullptr, src, count, extent());
}

TransferStatus File::read_at_all(FileOffset offset, void* buf, std::int64_t buf_offset,
                                 std::int64_t count, ElementType etype) {
    check_transfer_args(false, buf, offset, buf_offset, count, etype);
    group_.barrier();  // entry synchronization only
    auto* dst = static_cast<std::uint8_t*>(buf) + buf_offset * extent();
    return transfer(false, abs_byte(offset), dst, nullptr, count, extent());
}

TransferStatus File::write_at_all(FileOffset offset, const void* buf, std::int64_t buf_offset,
                                  std::int64_t count, ElementType etype) {
    check_transfer_args(true, buf, offset, buf_offset, count, etype);
    group_.barrier();
    const auto* src = static_cast<const std::uint8_t*>(buf) + buf_offset * extent();
    return transfer(true, abs_byte(offset), nullptr, src, count, extent());
}

AccessRequest File::iread_at(FileOffset offset, void* buf, std::int64_t buf_offset,
                             std::int64_t count, ElementType etype) {
    check_transfer_args(false, buf, offset, buf_offset, count, etype);
    auto* dst = static_cast<std::uint8_t*>(buf) + buf_offset * extent();
    return AccessRequest(launch(false, abs_byte(offset), dst, nullptr, count, extent()));
}

AccessRequest File::iwrite_at(FileOffset offset, const void* buf, std::int64_t buf_offset,
                              std::int64_t count, ElementType etype) {
    check_transfer_args(true, buf, offset, buf_offset, count, etype);
    const auto* src = static_cast<const std::uint8_t*>(buf) + buf_offset * extent();
    return AccessRequest(launch(true, abs_byte(offset), nullptr, src, count, extent()));
}

// ---- split collectives -------------------------------------------------------

void File::begin_split(SplitKind kind, bool write, std::int64_t abs, void* rbuf,
                       const void* wbuf, std::int64_t count) {
    const std::int64_t ext = extent();
    PendingSplit ps;
    ps.kind = kind;
    ps.write = write;
    ps.effective_buf = write ? wbuf : rbuf;
    if (count == 0) {
        std::promise<TransferStatus> p;
        p.set_value({0});
        ps.fut = p.get_future();
    } else {
        ps.fut = std::async(std::launch::async, [this, write, abs, rbuf, wbuf, count, ext] {
            return transfer(write, abs, rbuf, wbuf, count, ext);
        });
    }
    pending_split_ = std::move(ps);
}

TransferStatus File::end_split(SplitKind kind, bool write, const void* buf,
                               std::int64_t buf_offset) {
    check_open();
    if (!pending_split_) {
        throw IoError(ErrorClass::PendingSplitCollective, "end without a matching begin");
    }
    if (pending_split_->kind != kind || pending_split_->write != write) {
        throw IoError(ErrorClass::PendingSplitCollective,
                      "split end does not match the pending begin");
    }
    const void* effective = static_cast<const std::uint8_t*>(buf) + buf_offset * extent();
    if (effective != pending_split_->effective_buf) {
        throw IoError(ErrorClass::PendingSplitCollective,
                      "split end names a different buffer than begin");
    }
    auto fut = std::move(pending_split_->fut);
    pending_split_.reset();
    return fut.get();
}

void File::read_at_all_begin(FileOffset offset, void* buf, std::int64_t buf_offset,
                             std::int64_t count, ElementType etype) {
    check_no_split("begin");
    check_transfer_args(false, buf, offset, buf_offset, count, etype);
    group_.barrier();
    auto* dst = static_cast<std::uint8_t*>(buf) + buf_offset * extent();
    begin_split(SplitKind::AtAll, false, abs_byte(offset), dst, nullptr, count);
}

TransferStatus File::read_at_all_end(void* buf, std::int64_t buf_offset) {
    return end_split(SplitKind::AtAll, false, buf, buf_offset);
}

void File::write_at_all_begin(FileOffset offset, const void* buf, std::int64_t buf_offset,
                              std::int64_t count, ElementType etype) {
    check_no_split("begin");
    check_transfer_args(true, buf, offset, buf_offset, count, etype);
    group_.barrier();
    const auto* src = static_cast<const std::uint8_t*>(buf) + buf_offset * extent();
    begin_split(SplitKind::AtAll, true, abs_byte(offset), nullptr, src, count);
}

TransferStatus File::write_at_all_end(const void* buf, std::int64_t buf_offset) {
    return end_split(SplitKind::AtAll, true, buf, buf_offset);
}

// ---- individual file pointer ---------------------------------------------------

TransferStatus File::read(void* buf, std::int64_t buf_offset, std::int64_t count,
                          ElementType etype) {
    check_transfer_args(false, buf, 0, buf_offset, count, etype);
    auto* dst = static_cast<std::uint8_t*>(buf) + buf_offset * extent();
    auto st = transfer(false, abs_byte(ind_ptr_), dst, nullptr, count, extent());
    ind_ptr_ += st.count;
    return st;
}

TransferStatus File::write(const void* buf, std::int64_t buf_offset, std::int64_t count,
                           ElementType etype) {
    check_transfer_args(true, buf, 0, buf_offset, count, etype);
    const auto* src = static_cast<const std::uint8_t*>(buf) + buf_offset * extent();
    auto st = transfer(true, abs_byte(ind_ptr_), nullptr, src, count, extent());
    ind_ptr_ += st.count;
    return st;
}

TransferStatus File::read_all(void* buf, std::int64_t buf_offset, std::int64_t count,
                              ElementType etype) {
    check_transfer_args(false, buf, 0, buf_offset, count, etype);
    group_.barrier();
    auto* dst = static_cast<std::uint8_t*>(buf) + buf_offset * extent();
    auto st = transfer(false, abs_byte(ind_ptr_), dst, nullptr, count, extent());
    ind_ptr_ += st.count;
    return st;
}

TransferStatus File::write_all(const void* buf, std::int64_t buf_offset, std::int64_t count,
                               ElementType etype) {
    check_transfer_args(true, buf, 0, buf_offset, count, etype);
    group_.barrier();
    const auto* src = static_cast<const std::uint8_t*>(buf) + buf_offset * extent();
    auto st = transfer(true, abs_byte(ind_ptr_), nullptr, src, count, extent());
    ind_ptr_ += st.count;
    return st;
}

AccessRequest File::iread(void* buf, std::int64_t buf_offset, std::int64_t count,
                          ElementType etype) {
    check_transfer_args(false, buf, 0, buf_offset, count, etype);
    auto* dst = static_cast<std::uint8_t*>(buf) + buf_offset * extent();
    // The pointer advances by the requested count at initiation so callers
    // can pipeline; end-of-file shortness is reported in the status only.
    std::int64_t pos = ind_ptr_;
    ind_ptr_ += count;
    return AccessRequest(launch(false, abs_byte(pos), dst, nullptr, count, extent()));
}

AccessRequest File::iwrite(const void* buf, std::int64_t buf_offset, std::int64_t count,
                           ElementType etype) {
    check_transfer_args(true, buf, 0, buf_offset, count, etype);
    const auto* src = static_cast<const std::uint8_t*>(buf) + buf_offset * extent();
    std::int64_t pos = ind_ptr_;
    ind_ptr_ += count;
    return AccessRequest(launch(true, abs_byte(pos), nullptr, src, count, extent()));
}

void File::read_all_begin(void* buf, std::int64_t buf_offset, std::int64_t count,
                          ElementType etype) {
    check_no_split("begin");
    check_transfer_args(false, buf, 0, buf_offset, count, etype);
    std::int64_t pos = ind_ptr_;
    ind_ptr_ += count;
    group_.barrier();
    auto* dst = static_cast<std::uint8_t*>(buf) + buf_offset * extent();
    begin_split(SplitKind::IndividualAll, false, abs_byte(pos), dst, nullptr, count);
}

TransferStatus File::read_all_end(void* buf, std::int64_t buf_offset) {
    return end_split(SplitKind::IndividualAll, false, buf, buf_offset);
}

void File::write_all_begin(const void* buf, std::int64_t buf_offset, std::int64_t count,
                           ElementType etype) {
    check_no_split("begin");
    check_transfer_args(true, buf, 0, buf_offset, count, etype);
    std::int64_t pos = ind_ptr_;
    ind_ptr_ += count;
    group_.barrier();
    const auto* src = static_cast<const std::uint8_t*>(buf) + buf_offset * extent();
    begin_split(SplitKind::IndividualAll, true, abs_byte(pos), nullptr, src, count);
}

TransferStatus File::write_all_end(const void* buf, std::int64_t buf_offset) {
    return end_split(SplitKind::IndividualAll, true, buf, buf_offset);
}

std::int64_t File::size_in_etypes() const {
    std::int64_t bytes = backend_->size() - view_.disp;
    if (bytes < 0) bytes = 0;
    return bytes / extent();
}

void File::seek(FileOffset offset, Whence whence) {
    check_open();
    std::int64_t target = 0;
    switch (whence) {
        case Whence::Set: target = offset; break;
        case Whence::Cur: target = ind_ptr_ + offset; break;
        case Whence::End: target = size_in_etypes() + offset; break;
    }
    if (target < 0) {
        throw IoError(ErrorClass::BadOffset,
                      "seek target " + std::to_string(target) + " is negative");
    }
    ind_ptr_ = target;
}

FileOffset File::get_position() const {
    check_open();
    return ind_ptr_;
}

FileOffset File::get_byte_offset(FileOffset offset) const {
    check_open();
    if (offset < 0) throw IoError(ErrorClass::BadOffset, "negative view-relative offset");
    return view_.disp + offset * extent();
}

// ---- shared file pointer -------------------------------------------------------

std::int64_t File::shared_claim(std::int64_t count) {
    return group_.fetch_add(file_id_, kSharedCounter, count);
}

std::int64_t File::shared_get() const {
    return group_.fetch_add(file_id_, kSharedCounter, 0);
}

void File::shared_set_rank0(std::int64_t target) {
    std::int64_t old = group_.fetch_add(file_id_, kSharedCounter, 0);
    group_.fetch_add(file_id_, kSharedCounter, target - old);
}

TransferStatus File::read_shared(void* buf, std::int64_t buf_offset, std::int64_t count,
                                 ElementType etype) {
    check_transfer_args(false, buf, 0, buf_offset, count, etype);
    std::int64_t pos = count > 0 ? shared_claim(count) : shared_get();
    auto* dst = static_cast<std::uint8_t*>(buf) + buf_offset * extent();
    return transfer(false, abs_byte(pos), dst, nullptr, count, extent());
}

TransferStatus File::write_shared(const void* buf, std::int64_t buf_offset,
                                  std::int64_t count, ElementType etype) {
    check_transfer_args(true, buf, 0, buf_offset, count, etype);
    std::int64_t pos = count > 0 ? shared_claim(count) : shared_get();
    const auto* src = static_cast<const std::uint8_t*>(buf) + buf_offset * extent();
    return transfer(true, abs_byte(pos), nullptr, src, count, extent());
}

AccessRequest File::iread_shared(void* buf, std::int64_t buf_offset, std::int64_t count,
                                 ElementType etype) {
    check_transfer_args(false, buf, 0, buf_offset, count, etype);
    // The claim happens at initiation; only the transfer is asynchronous.
    std::int64_t pos = count > 0 ? shared_claim(count) : 0;
    auto* dst = static_cast<std::uint8_t*>(buf) + buf_offset * extent();
    return AccessRequest(launch(false, abs_byte(pos), dst, nullptr, count, extent()));
}

AccessRequest File::iwrite_shared(const void* buf, std::int64_t buf_offset,
                                  std::int64_t count, ElementType etype) {
    check_transfer_args(true, buf, 0, buf_offset, count, etype);
    std::int64_t pos = count > 0 ? shared_claim(count) : 0;
    const auto* src = static_cast<const std::uint8_t*>(buf) + buf_offset * extent();
    return AccessRequest(launch(true, abs_byte(pos), nullptr, src, count, extent()));
}

std::int64_t File::ordered_claim(std::int64_t count) {
    auto counts = group_.all_gather(count);
    std::int64_t total = 0;
    std::int64_t prefix = 0;
    for (int r = 0; r < static_cast<int>(counts.size()); ++r) {
        if (r < group_.rank()) prefix += counts[r];
        total += counts[r];
    }
    std::vector<std::uint8_t> payload;
    if (group_.rank() == 0) {
        wire::put_i64(payload, shared_claim(total));
    }
    auto got = group_.broadcast(0, payload);
    wire::Cursor cur(got);
    return cur.i64() + prefix;
}

TransferStatus File::read_ordered(void* buf, std::int64_t buf_offset, std::int64_t count,
                                  ElementType etype) {
    check_transfer_args(false, buf, 0, buf_offset, count, etype);
    std::int64_t start = ordered_claim(count);
    auto* dst = static_cast<std::uint8_t*>(buf) + buf_offset * extent();
    auto st = transfer(false, abs_byte(start), dst, nullptr, count, extent());
    group_.barrier();
    return st;
}

TransferStatus File::write_ordered(const void* buf, std::int64_t buf_offset,
                                   std::int64_t count, ElementType etype) {
    check_transfer_args(true, buf, 0, buf_offset, count, etype);
    std::int64_t start = ordered_claim(count);
    const auto* src = static_cast<const std::uint8_t*>(buf) + buf_offset * extent();
    auto st = transfer(true, abs_byte(start), nullptr, src, count, extent());
    group_.barrier();
    return st;
}

void File::read_ordered_begin(void* buf, std::int64_t buf_offset, std::int64_t count,
                              ElementType etype) {
    check_no_split("begin");
    check_transfer_args(false, buf, 0, buf_offset, count, etype);
    std::int64_t start = ordered_claim(count);
    auto* dst = static_cast<std::uint8_t*>(buf) + buf_offset * extent();
    begin_split(SplitKind::Ordered, false, abs_byte(start), dst, nullptr, count);
}

TransferStatus File::read_ordered_end(void* buf, std::int64_t buf_offset) {
    return end_split(SplitKind::Ordered, false, buf, buf_offset);
}

void File::write_ordered_begin(const void* buf, std::int64_t buf_offset, std::int64_t count,
                               ElementType etype) {
    check_no_split("begin");
    check_transfer_args(true, buf, 0, buf_offset, count, etype);
    std::int64_t start = ordered_claim(count);
    const auto* src = static_cast<const std::uint8_t*>(buf) + buf_offset * extent();
    begin_split(SplitKind::Ordered, true, abs_byte(start), nullptr, src, count);
}

TransferStatus File::write_ordered_end(const void* buf, std::int64_t buf_offset) {
    return end_split(SplitKind::Ordered, true, buf, buf_offset);
}

void File::seek_shared(FileOffset offset, Whence whence) {
    check_open();
    std::uint64_t d = fnv1a("seekShared");
    d = digest_i64(d, offset);
    d = digest_i64(d, static_cast<std::int64_t>(whence));
    group_.agree(d, "seekShared");
    // Rank 0 computes and applies the new pointer; the broadcast of the
    // target doubles as the completion rendezvous.
    std::vector<std::uint8_t> payload;
    if (group_.rank() == 0) {
        std::int64_t old = shared_get();
        std::int64_t t = 0;
        switch (whence) {
            case Whence::Set: t = offset; break;
            case Whence::Cur: t = old + offset; break;
            case Whence::End: t = size_in_etypes() + offset; break;
        }
        if (t >= 0) {
            group_.fetch_add(file_id_, kSharedCounter, t - old);
        }
        wire::put_i64(payload, t);
    }
    auto got = group_.broadcast(0, payload);
    wire::Cursor cur(got);
    std::int64_t target = cur.i64();
    if (target < 0) {
        throw IoError(ErrorClass::BadOffset,
                      "shared seek target " + std::to_string(target) + " is negative");
    }
}

FileOffset File::get_position_shared() const {
    check_open();
    return shared_get();
}

}  // namespace pario
