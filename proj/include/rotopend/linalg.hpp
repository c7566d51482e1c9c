#ifndef ROTOPEND_LINALG_HPP
#define ROTOPEND_LINALG_HPP

#include <array>
#include <cmath>

namespace rotopend {

// Fixed-size 4-vector and 4x4 matrix, enough for the phase space and its
// variational flow. Row-major.
struct Vec4 {
    std::array<double, 4> v{};

    double& operator[](int i) { return v[i]; }
    double operator[](int i) const { return v[i]; }

    Vec4& operator+=(const Vec4& o) {
        for (int i = 0; i < 4; ++i) v[i] += o.v[i];
        return *this;
    }
    friend Vec4 operator+(Vec4 a, const Vec4& b) { return a += b; }
    friend Vec4 operator*(double s, Vec4 a) {
        for (auto& x : a.v) x *= s;
        return a;
    }
    friend Vec4 operator-(Vec4 a, const Vec4& b) {
        for (int i = 0; i < 4; ++i) a.v[i] -= b.v[i];
        return a;
    }

    double norm() const {
        return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
    }
};

struct Mat4 {
    std::array<double, 16> m{};

    double& operator()(int r, int c) { return m[4 * r + c]; }
    double operator()(int r, int c) const { return m[4 * r + c]; }

    static Mat4 identity() {
        Mat4 I;
        for (int i = 0; i < 4; ++i) I(i, i) = 1.0;
        return I;
    }

    Mat4& operator+=(const Mat4& o) {
        for (int i = 0; i < 16; ++i) m[i] += o.m[i];
        return *this;
    }
    friend Mat4 operator+(Mat4 a, const Mat4& b) { return a += b; }
    friend Mat4 operator-(Mat4 a, const Mat4& b) {
        for (int i = 0; i < 16; ++i) a.m[i] -= b.m[i];
        return a;
    }
    friend Mat4 operator*(double s, Mat4 a) {
        for (auto& x : a.m) x *= s;
        return a;
    }
    friend Mat4 operator*(const Mat4& a, const Mat4& b) {
        Mat4 c;
        for (int r = 0; r < 4; ++r)
            for (int k = 0; k < 4; ++k) {
                const double arc = a(r, k);
                for (int col = 0; col < 4; ++col) c(r, col) += arc * b(k, col);
            }
        return c;
    }
    friend Vec4 operator*(const Mat4& a, const Vec4& x) {
        Vec4 y;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) y[r] += a(r, c) * x[c];
        return y;
    }

    double frobenius_norm() const {
        double s = 0;
        for (double x : m) s += x * x;
        return std::sqrt(s);
    }

    // Determinant by Gaussian elimination with partial pivoting.
    double det() const {
        std::array<double, 16> a = m;
        double d = 1.0;
        for (int col = 0; col < 4; ++col) {
            int piv = col;
            for (int r = col + 1; r < 4; ++r)
                if (std::fabs(a[4 * r + col]) > std::fabs(a[4 * piv + col])) piv = r;
            if (a[4 * piv + col] == 0.0) return 0.0;
            if (piv != col) {
                for (int c = 0; c < 4; ++c) std::swap(a[4 * piv + c], a[4 * col + c]);
                d = -d;
            }
            d *= a[4 * col + col];
            for (int r = col + 1; r < 4; ++r) {
                const double f = a[4 * r + col] / a[4 * col + col];
                for (int c = col; c < 4; ++c) a[4 * r + c] -= f * a[4 * col + c];
            }
        }
        return d;
    }
};

}  // namespace rotopend

#endif
