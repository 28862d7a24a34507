#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "hmrsim/types.hpp"

namespace hmr {

/// Word-interleaved multi-bank scratchpad with per-bank round-robin
/// arbitration. Addresses are relative to the TCDM base.
class Tcdm {
public:
    Tcdm(size_t size_bytes, int n_banks);

    struct Request {
        int requester = 0; // virtual-core id (also the round-robin slot)
        DataReq req;
    };
    struct Result {
        enum class Status : uint8_t { Grant, Stall, BusError };
        int requester = 0;
        Status status = Status::Stall;
        Word rdata = 0;
    };

    /// Resolves one cycle of requests: per bank exactly one grant, losers
    /// stalled, round-robin pointer advanced past the winner.
    std::vector<Result> cycle(const std::vector<Request>& requests);

    int bank_index(Word addr) const { return static_cast<int>((addr / 4) % banks_.size()); }
    int n_banks() const { return static_cast<int>(banks_.size()); }
    size_t size_bytes() const { return size_bytes_; }

    // backdoor access for loaders, digests and recovery engines
    Word load_word(Word addr) const;
    void store_word(Word addr, Word value);
    uint64_t digest(Word addr, size_t len_bytes) const;

private:
    size_t size_bytes_;
    std::vector<std::vector<Word>> banks_;
    std::vector<int> rr_pointer_; // per bank: next requester slot to favor
    int max_requesters_;
};

/// Cluster event unit: synchronization barriers (blocking reads that
/// complete when every participant has arrived) and per-core interrupt
/// lines.
class EventUnit {
public:
    void set_participants(std::vector<int> ids);
    const std::vector<int>& participants() const { return participants_; }

    /// Registers a blocking barrier read. Returns true if the barrier
    /// completed this cycle (all participants present); the caller then
    /// broadcasts the release to waiters() and calls clear_waiters().
    bool arrive(int id);
    void remove_waiter(int id); // interrupt wake-up drops the pending read
    const std::set<int>& waiters() const { return waiters_; }
    void clear_waiters() { waiters_.clear(); }
    bool barrier_complete();

    void raise_irq(int core, Word cause);
    bool irq_pending(int core) const;
    Word irq_cause(int core) const;
    void clear_irq(int core);

private:
    std::vector<int> participants_;
    std::set<int> waiters_;
    std::map<int, Word> irq_;
};

} // namespace hmr
