#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace byzrep {

/**
 * Fixed-capacity sliding window of bits.
 *
 * push() shifts the whole register by one and inserts the new bit at age 0;
 * once `capacity()` bits are held, the oldest bit falls off. Two windows that
 * have seen the same number of pushes are aligned bit-for-bit, which is what
 * makes hamming() a word-wise popcount.
 */
class BitWindow {
public:
    BitWindow() = default;

    explicit BitWindow(std::size_t capacity)
        : capacity_(capacity), words_((capacity + 63) / 64, 0) {
        if (capacity == 0) {
            throw std::invalid_argument("BitWindow capacity must be positive");
        }
    }

    void push(bool bit) {
        for (std::size_t w = words_.size() - 1; w > 0; --w) {
            words_[w] = (words_[w] << 1) | (words_[w - 1] >> 63);
        }
        words_[0] = (words_[0] << 1) | static_cast<std::uint64_t>(bit);
        const std::size_t tail = capacity_ % 64;
        if (tail != 0) {
            words_.back() &= (std::uint64_t{1} << tail) - 1;
        }
        if (size_ < capacity_) ++size_;
    }

    /// Bit pushed `age` steps ago (0 = newest).
    [[nodiscard]] bool at(std::size_t age) const {
        if (age >= size_) throw std::out_of_range("BitWindow::at");
        return (words_[age / 64] >> (age % 64)) & 1U;
    }

    [[nodiscard]] std::size_t size() const noexcept { return size_; }
    [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }
    [[nodiscard]] bool empty() const noexcept { return size_ == 0; }

    [[nodiscard]] std::size_t count() const noexcept {
        std::size_t n = 0;
        for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }

    [[nodiscard]] bool all_set() const noexcept { return size_ > 0 && count() == size_; }

    void clear() noexcept {
        for (auto& w : words_) w = 0;
        size_ = 0;
    }

    /// Number of positions at which the two windows differ.
    friend std::size_t hamming(const BitWindow& a, const BitWindow& b) {
        if (a.size_ != b.size_ || a.words_.size() != b.words_.size()) {
            throw std::invalid_argument("hamming: bit sequences differ in length");
        }
        std::size_t n = 0;
        for (std::size_t w = 0; w < a.words_.size(); ++w) {
            n += static_cast<std::size_t>(std::popcount(a.words_[w] ^ b.words_[w]));
        }
        return n;
    }

private:
    std::size_t capacity_ = 0;
    std::size_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

}  // namespace byzrep
