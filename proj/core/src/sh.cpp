#include "splatedit/sh.hpp"

#include "splatedit/scene.hpp"

namespace splatedit {

namespace {
constexpr double kC1 = 0.4886025119029199;
constexpr double kC2[] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                          -1.0925484305920792, 0.5462742152960396};
constexpr double kC3[] = {-0.5900435899266435, 2.890611442640554, -0.4570457994644658,
                          0.3731763325901154,  -0.4570457994644658, 1.445305721320277,
                          -0.5900435899266435};
}  // namespace

void sh_basis(int degree, const Vec3d& dir, std::array<double, 16>& b, std::array<Vec3d, 16>* grad) {
    const double x = dir.x(), y = dir.y(), z = dir.z();
    b[0] = kShC0;
    if (grad) (*grad)[0] = Vec3d::Zero();
    if (degree < 1) return;
    b[1] = -kC1 * y;
    b[2] = kC1 * z;
    b[3] = -kC1 * x;
    if (grad) {
        (*grad)[1] = Vec3d(0, -kC1, 0);
        (*grad)[2] = Vec3d(0, 0, kC1);
        (*grad)[3] = Vec3d(-kC1, 0, 0);
    }
    if (degree < 2) return;
    const double xx = x * x, yy = y * y, zz = z * z, xy = x * y, yz = y * z, xz = x * z;
    b[4] = kC2[0] * xy;
    b[5] = kC2[1] * yz;
    b[6] = kC2[2] * (2 * zz - xx - yy);
    b[7] = kC2[3] * xz;
    b[8] = kC2[4] * (xx - yy);
    if (grad) {
        (*grad)[4] = kC2[0] * Vec3d(y, x, 0);
        (*grad)[5] = kC2[1] * Vec3d(0, z, y);
        (*grad)[6] = kC2[2] * Vec3d(-2 * x, -2 * y, 4 * z);
        (*grad)[7] = kC2[3] * Vec3d(z, 0, x);
        (*grad)[8] = kC2[4] * Vec3d(2 * x, -2 * y, 0);
    }
    if (degree < 3) return;
    b[9] = kC3[0] * y * (3 * xx - yy);
    b[10] = kC3[1] * xy * z;
    b[11] = kC3[2] * y * (4 * zz - xx - yy);
    b[12] = kC3[3] * z * (2 * zz - 3 * xx - 3 * yy);
    b[13] = kC3[4] * x * (4 * zz - xx - yy);
    b[14] = kC3[5] * z * (xx - yy);
    b[15] = kC3[6] * x * (xx - 3 * yy);
    if (grad) {
        (*grad)[9] = kC3[0] * Vec3d(6 * xy, 3 * xx - 3 * yy, 0);
        (*grad)[10] = kC3[1] * Vec3d(yz, xz, xy);
        (*grad)[11] = kC3[2] * Vec3d(-2 * xy, 4 * zz - xx - 3 * yy, 8 * yz);
        (*grad)[12] = kC3[3] * Vec3d(-6 * xz, -6 * yz, 6 * zz - 3 * xx - 3 * yy);
        (*grad)[13] = kC3[4] * Vec3d(4 * zz - 3 * xx - yy, -2 * xy, 8 * xz);
        (*grad)[14] = kC3[5] * Vec3d(2 * xz, -2 * yz, xx - yy);
        (*grad)[15] = kC3[6] * Vec3d(3 * xx - 3 * yy, -6 * xy, 0);
    }
}

}  // namespace splatedit
