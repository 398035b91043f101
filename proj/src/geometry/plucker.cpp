#include "omniview/geometry/plucker.hpp"

namespace ov::geo {

PluckerMap plucker_map(const Camera& camera, int height, int width) {
    if (height < 1 || width < 1) throw InvalidInputError("plucker_map: height and width must be >= 1");
    camera.validate();

    PluckerMap map;
    map.height = height;
    map.width = width;
    map.values.resize(std::size_t(height) * width * 6);

    const Vec3 o = camera.translation;
    for (int i = 0; i < height; ++i) {
        for (int j = 0; j < width; ++j) {
            Vec3 d = camera.pixel_ray(i, j, height, width);
            Vec3 m = o.cross(d);
            double* r = &map.at(i, j, 0);
            r[0] = m.x;
            r[1] = m.y;
            r[2] = m.z;
            r[3] = d.x;
            r[4] = d.y;
            r[5] = d.z;
        }
    }
    return map;
}

}  // namespace ov::geo
