#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dermseg {

/// Thrown for contract violations and malformed inputs across the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Rgb = std::array<std::uint8_t, 3>;
using Lab = std::array<double, 3>;

struct PixelCoord {
    int x = 0;
    int y = 0;

    friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

/// Row-major raster of `T`. Width and height are at least one for any image
/// produced by the library; a default-constructed raster is empty.
template <typename T>
class Raster {
public:
    using value_type = T;

    Raster() = default;

    Raster(int width, int height, T fill = T{})
        : width_(width), height_(height)
    {
        if (width < 1 || height < 1) {
            throw Error("image dimensions must be positive, got " + std::to_string(width) + "x" +
                        std::to_string(height));
        }
        data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }

    Raster(int width, int height, std::vector<T> data)
        : width_(width), height_(height), data_(std::move(data))
    {
        if (width < 1 || height < 1) {
            throw Error("image dimensions must be positive");
        }
        if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
            throw Error("pixel buffer length does not match width x height");
        }
    }

    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    [[nodiscard]] bool contains(int x, int y) const noexcept
    {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }
    [[nodiscard]] bool contains(PixelCoord p) const noexcept { return contains(p.x, p.y); }

    [[nodiscard]] std::size_t index(int x, int y) const noexcept
    {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
    const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }
    T& operator[](std::size_t i) noexcept { return data_[i]; }
    const T& operator[](std::size_t i) const noexcept { return data_[i]; }

    [[nodiscard]] std::vector<T>& data() noexcept { return data_; }
    [[nodiscard]] const std::vector<T>& data() const noexcept { return data_; }

    template <typename U>
    [[nodiscard]] bool same_shape(const Raster<U>& other) const noexcept
    {
        return width_ == other.width() && height_ == other.height();
    }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

using RgbImage = Raster<Rgb>;
using LabImage = Raster<Lab>;
using GrayImage = Raster<double>;

// std::vector<bool> is avoided so masks expose contiguous storage.
using BinaryMask = Raster<std::uint8_t>;

template <typename A, typename B>
void require_same_shape(const Raster<A>& a, const Raster<B>& b, const char* what)
{
    if (!a.same_shape(b)) {
        throw Error(std::string(what) + ": dimension mismatch (" + std::to_string(a.width()) +
                    "x" + std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                    std::to_string(b.height()) + ")");
    }
}

inline std::size_t count_true(const BinaryMask& mask)
{
    std::size_t n = 0;
    for (auto v : mask.data()) {
        n += v != 0;
    }
    return n;
}

}  // namespace dermseg
