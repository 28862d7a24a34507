#include "hmrsim/hmr.hpp"

namespace hmr {

CheckResult check_pair(const OutputBundle& a, const OutputBundle& b) {
    CheckResult r;
    if (a == b) {
        r.output = a;
        r.error = false;
    } else {
        r.output = OutputBundle{}; // gated
        r.error = true;
    }
    return r;
}

namespace {

constexpr int kBundleWords = 6;

void serialize(const OutputBundle& o, Word* w) {
    w[0] = o.ifetch_addr;
    w[1] = o.req.valid;
    w[2] = o.req.addr;
    w[3] = o.req.wdata;
    w[4] = o.req.we;
    w[5] = o.req.byte_en;
}

OutputBundle deserialize(const Word* w) {
    OutputBundle o;
    o.ifetch_addr = w[0];
    o.req.valid = w[1];
    o.req.addr = w[2];
    o.req.wdata = w[3];
    o.req.we = w[4];
    o.req.byte_en = w[5];
    return o;
}

} // namespace

VoteResult vote_triple(const OutputBundle& a, const OutputBundle& b, const OutputBundle& c) {
    VoteResult r;
    r.error = !(a == b && b == c);
    if (!r.error) {
        r.output = a;
        return r;
    }

    Word wa[kBundleWords], wb[kBundleWords], wc[kBundleWords], wm[kBundleWords];
    serialize(a, wa);
    serialize(b, wb);
    serialize(c, wc);
    for (int i = 0; i < kBundleWords; ++i)
        wm[i] = (wa[i] & wb[i]) | (wb[i] & wc[i]) | (wa[i] & wc[i]);
    r.output = deserialize(wm);
    r.output.canonicalize();

    const OutputBundle* slots[3] = {&a, &b, &c};
    OutputBundle majority = deserialize(wm); // pre-canonicalization view
    int match = 0;
    std::optional<int> dissent;
    for (int s = 0; s < 3; ++s) {
        if (*slots[s] == majority)
            ++match;
        else
            dissent = s;
    }
    if (match == 2) {
        r.dissenter = dissent;
    } else {
        // all three pairwise distinct: no slot equals the bitwise majority
        r.group_failure = true;
    }
    return r;
}

} // namespace hmr
