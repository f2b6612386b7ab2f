#pragma once

// Random-access frame sequences. Recordings may be materialised or produced
// on demand (simulated channels, PNG stores).

#include <cstddef>
#include <span>

#include "revelio/error.hpp"
#include "revelio/image.hpp"

namespace revelio {

class FrameSource {
public:
    virtual ~FrameSource() = default;
    virtual std::size_t size() const = 0;
    /// Frame k, 0 <= k < size(). Sources may cache, so this is non-const.
    virtual FrameBuffer frame(std::size_t k) = 0;
};

/// Non-owning view over frames held in memory.
class SpanFrameSource : public FrameSource {
public:
    explicit SpanFrameSource(std::span<const FrameBuffer> frames) : frames_(frames) {}

    std::size_t size() const override { return frames_.size(); }
    FrameBuffer frame(std::size_t k) override {
        if (k >= frames_.size()) throw Error(ErrorCode::InvalidArgument, "frame index out of range");
        return frames_[k];
    }

private:
    std::span<const FrameBuffer> frames_;
};

} // namespace revelio
