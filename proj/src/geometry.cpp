#include "adc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "adc/errors.hpp"

namespace adc {

namespace {

double cross(Point o, Point a, Point b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(Point p, Point a, Point b) {
    if (cross(a, b, p) != 0.0) return false;
    return p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) &&
           p.y >= std::min(a.y, b.y) && p.y <= std::max(a.y, b.y);
}

// Proper crossing of open segments; shared endpoints do not count, which is
// what ring adjacency needs.
bool segments_cross(Point a1, Point a2, Point b1, Point b2) {
    double d1 = cross(b1, b2, a1);
    double d2 = cross(b1, b2, a2);
    double d3 = cross(a1, a2, b1);
    double d4 = cross(a1, a2, b2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    return false;
}

int distinct_points(const Ring& r) {
    // Ring is closed, so skip the duplicated last point.
    std::vector<Point> pts(r.begin(), r.empty() ? r.end() : r.end() - 1);
    std::sort(pts.begin(), pts.end(), [](Point a, Point b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    int n = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i == 0 || pts[i].x != pts[i - 1].x || pts[i].y != pts[i - 1].y) ++n;
    }
    return n;
}

}  // namespace

void validate_ring(const Ring& r, const char* what) {
    if (r.size() < 4)
        throw DataError(std::string(what) + ": ring needs at least 4 points");
    if (r.front().x != r.back().x || r.front().y != r.back().y)
        throw DataError(std::string(what) + ": ring not closed");
    if (distinct_points(r) < 3)
        throw DataError(std::string(what) + ": ring has fewer than 3 distinct points");
}

void validate_polygon(const Polygon& p) {
    validate_ring(p.exterior, "exterior");
    const std::size_t n = p.exterior.size() - 1;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;  // first and last edge are adjacent
            if (segments_cross(p.exterior[i], p.exterior[i + 1],
                               p.exterior[j], p.exterior[j + 1]))
                throw DataError("exterior: ring self-intersects");
        }
    }
    for (std::size_t h = 0; h < p.holes.size(); ++h) {
        validate_ring(p.holes[h], ("hole " + std::to_string(h)).c_str());
    }
}

void validate_geometry(const MultiPolygon& g) {
    if (g.parts.empty()) throw DataError("geometry has no parts");
    for (std::size_t i = 0; i < g.parts.size(); ++i) {
        try {
            validate_polygon(g.parts[i]);
        } catch (const DataError& e) {
            if (g.parts.size() == 1) throw;
            throw DataError("part " + std::to_string(i) + ": " + e.what());
        }
    }
}

double ring_area_signed(const Ring& r) {
    double s = 0;
    for (std::size_t i = 0; i + 1 < r.size(); ++i)
        s += r[i].x * r[i + 1].y - r[i + 1].x * r[i].y;
    return s / 2.0;
}

double polygon_area(const Polygon& p) {
    double a = std::fabs(ring_area_signed(p.exterior));
    for (const Ring& h : p.holes) a -= std::fabs(ring_area_signed(h));
    return std::max(a, 0.0);
}

double polygon_area(const MultiPolygon& g) {
    double a = 0;
    for (const Polygon& p : g.parts) a += polygon_area(p);
    return a;
}

BBox geometry_bbox(const Polygon& p) {
    BBox b{p.exterior[0].x, p.exterior[0].y, p.exterior[0].x, p.exterior[0].y};
    for (const Point& pt : p.exterior) {
        b.min_x = std::min(b.min_x, pt.x);
        b.min_y = std::min(b.min_y, pt.y);
        b.max_x = std::max(b.max_x, pt.x);
        b.max_y = std::max(b.max_y, pt.y);
    }
    return b;
}

BBox geometry_bbox(const MultiPolygon& g) {
    BBox b = geometry_bbox(g.parts.at(0));
    for (std::size_t i = 1; i < g.parts.size(); ++i) {
        BBox o = geometry_bbox(g.parts[i]);
        b.min_x = std::min(b.min_x, o.min_x);
        b.min_y = std::min(b.min_y, o.min_y);
        b.max_x = std::max(b.max_x, o.max_x);
        b.max_y = std::max(b.max_y, o.max_y);
    }
    return b;
}

namespace {

// Half-open crossing rule so a ray through a vertex counts once.
bool ray_crosses(Point p, Point a, Point b) {
    if ((a.y > p.y) == (b.y > p.y)) return false;
    double x_hit = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
    return x_hit > p.x;
}

bool point_on_ring(Point p, const Ring& r) {
    for (std::size_t i = 0; i + 1 < r.size(); ++i)
        if (on_segment(p, r[i], r[i + 1])) return true;
    return false;
}

bool parity_in_ring(Point p, const Ring& r) {
    bool in = false;
    for (std::size_t i = 0; i + 1 < r.size(); ++i)
        if (ray_crosses(p, r[i], r[i + 1])) in = !in;
    return in;
}

}  // namespace

bool point_in_polygon(Point pt, const Polygon& p) {
    if (point_on_ring(pt, p.exterior)) return true;
    for (const Ring& h : p.holes)
        if (point_on_ring(pt, h)) return true;
    bool in = parity_in_ring(pt, p.exterior);
    for (const Ring& h : p.holes)
        if (parity_in_ring(pt, h)) in = !in;
    return in;
}

bool point_in_polygon(Point pt, const MultiPolygon& g) {
    for (const Polygon& p : g.parts)
        if (point_in_polygon(pt, p)) return true;
    return false;
}

namespace {

double point_segment_distance(Point p, Point a, Point b) {
    double dx = b.x - a.x, dy = b.y - a.y;
    double len2 = dx * dx + dy * dy;
    double t = 0;
    if (len2 > 0) {
        t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
        t = std::clamp(t, 0.0, 1.0);
    }
    double ex = a.x + t * dx - p.x, ey = a.y + t * dy - p.y;
    return std::sqrt(ex * ex + ey * ey);
}

void collect_rings(const MultiPolygon& g, std::vector<const Ring*>& out) {
    for (const Polygon& p : g.parts) {
        out.push_back(&p.exterior);
        for (const Ring& h : p.holes) out.push_back(&h);
    }
}

}  // namespace

double segment_distance(Point a1, Point a2, Point b1, Point b2) {
    if (segments_cross(a1, a2, b1, b2)) return 0.0;
    double d = point_segment_distance(a1, b1, b2);
    d = std::min(d, point_segment_distance(a2, b1, b2));
    d = std::min(d, point_segment_distance(b1, a1, a2));
    d = std::min(d, point_segment_distance(b2, a1, a2));
    return d;
}

double geometry_distance(const MultiPolygon& a, const MultiPolygon& b) {
    // Boundary-disjoint geometries are either separated or nested; one
    // representative vertex decides nesting.
    if (point_in_polygon(a.parts.at(0).exterior.at(0), b)) return 0.0;
    if (point_in_polygon(b.parts.at(0).exterior.at(0), a)) return 0.0;

    std::vector<const Ring*> ra, rb;
    collect_rings(a, ra);
    collect_rings(b, rb);
    double best = std::numeric_limits<double>::infinity();
    for (const Ring* r1 : ra) {
        for (const Ring* r2 : rb) {
            for (std::size_t i = 0; i + 1 < r1->size(); ++i) {
                for (std::size_t j = 0; j + 1 < r2->size(); ++j) {
                    best = std::min(best, segment_distance((*r1)[i], (*r1)[i + 1],
                                                           (*r2)[j], (*r2)[j + 1]));
                    if (best == 0.0) return 0.0;
                }
            }
        }
    }
    return best;
}

}  // namespace adc
