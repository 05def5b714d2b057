#pragma once

// Current corpus behind a lock; readers take O(1) snapshots, one writer applies batches.

#include <memory>
#include <mutex>

#include <wharf/updater.hpp>

namespace wharf {

class LiveCorpus {
public:
    LiveCorpus(Corpus c, MergePolicy policy, unsigned threads = 1)
        : current_(std::make_shared<const Corpus>(std::move(c))), policy_(policy), threads_(threads)
    {
    }

    std::shared_ptr<const Corpus> acquire() const
    {
        std::lock_guard lock(read_mu_);
        return current_;
    }
    GraphSnapshot acquire_snapshot() const { return acquire()->graph; }

    /// Readers keep seeing the previous corpus until the new one is published.
    UpdateResult apply_batch(EdgeBatch const& batch)
    {
        std::lock_guard writer(write_mu_);
        UpdateResult r = apply_update(*acquire(), batch, policy_, threads_);
        publish(r.corpus);
        return r;
    }

    void merge()
    {
        std::lock_guard writer(write_mu_);
        publish(merge_corpus(*acquire(), threads_));
    }

    MergePolicy policy() const noexcept { return policy_; }

private:
    void publish(Corpus c)
    {
        auto next = std::make_shared<const Corpus>(std::move(c));
        std::lock_guard lock(read_mu_);
        current_ = std::move(next);
    }

    mutable std::mutex read_mu_;
    std::mutex write_mu_;
    std::shared_ptr<const Corpus> current_;
    MergePolicy policy_;
    unsigned threads_;
};

}  // namespace wharf
