#include "hmrsim/interconnect.hpp"

#include <algorithm>
#include <stdexcept>

namespace hmr {

Tcdm::Tcdm(size_t size_bytes, int n_banks) : size_bytes_(size_bytes) {
    if (n_banks <= 0 || size_bytes < 4 || size_bytes % 4 != 0)
        throw std::invalid_argument("TCDM size must be a positive multiple of the word size");
    // last row may be partial; bounds are enforced against size_bytes_
    size_t words_per_bank = (size_bytes / 4 + n_banks - 1) / n_banks;
    banks_.assign(n_banks, std::vector<Word>(words_per_bank, 0));
    rr_pointer_.assign(n_banks, 0);
    max_requesters_ = 64; // round-robin slot space; ids are small
}

Word Tcdm::load_word(Word addr) const {
    Word w = addr / 4;
    return banks_[w % banks_.size()][w / banks_.size()];
}

void Tcdm::store_word(Word addr, Word value) {
    Word w = addr / 4;
    banks_[w % banks_.size()][w / banks_.size()] = value;
}

uint64_t Tcdm::digest(Word addr, size_t len_bytes) const {
    Fnv1a h;
    for (Word a = addr; a < addr + len_bytes; a += 4) h.update_u32(load_word(a));
    return h.digest();
}

std::vector<Tcdm::Result> Tcdm::cycle(const std::vector<Request>& requests) {
    std::vector<Result> results(requests.size());
    // group contenders per bank
    std::vector<std::vector<int>> per_bank(banks_.size());
    for (size_t i = 0; i < requests.size(); ++i) {
        const Request& rq = requests[i];
        results[i].requester = rq.requester;
        if (!rq.req.valid) continue;
        if (rq.req.addr + 4 > size_bytes_) {
            results[i].status = Result::Status::BusError;
            continue;
        }
        per_bank[bank_index(rq.req.addr)].push_back(static_cast<int>(i));
    }
    for (size_t b = 0; b < banks_.size(); ++b) {
        auto& contenders = per_bank[b];
        if (contenders.empty()) continue;
        // winner: smallest (requester - rr_pointer) mod slot-space
        int best = contenders[0];
        int best_dist = max_requesters_ + 1;
        for (int idx : contenders) {
            int dist = (requests[idx].requester - rr_pointer_[b] + max_requesters_) %
                       max_requesters_;
            if (dist < best_dist) {
                best_dist = dist;
                best = idx;
            }
        }
        for (int idx : contenders)
            results[idx].status = idx == best ? Result::Status::Grant : Result::Status::Stall;
        const DataReq& req = requests[best].req;
        if (req.we) {
            // byte enables: word stores only in this model
            store_word(req.addr, req.wdata);
        } else {
            results[best].rdata = load_word(req.addr);
        }
        rr_pointer_[b] = (requests[best].requester + 1) % max_requesters_;
    }
    return results;
}

void EventUnit::set_participants(std::vector<int> ids) {
    if (ids.empty()) throw std::invalid_argument("barrier participant set must not be empty");
    std::sort(ids.begin(), ids.end());
    participants_ = std::move(ids);
}

bool EventUnit::arrive(int id) {
    waiters_.insert(id);
    return barrier_complete();
}

bool EventUnit::barrier_complete() {
    if (participants_.empty()) return false;
    for (int p : participants_)
        if (!waiters_.count(p)) return false;
    return true;
}

void EventUnit::remove_waiter(int id) { waiters_.erase(id); }

void EventUnit::raise_irq(int core, Word cause) { irq_[core] = cause; }
bool EventUnit::irq_pending(int core) const { return irq_.count(core) != 0; }
Word EventUnit::irq_cause(int core) const {
    auto it = irq_.find(core);
    return it == irq_.end() ? 0 : it->second;
}
void EventUnit::clear_irq(int core) { irq_.erase(core); }

} // namespace hmr
