#pragma once

#include <vector>

#include "adc/grid.hpp"

namespace adc {

struct Point {
    double x = 0, y = 0;
};

// Closed ring: first point equals last, at least 4 entries.
using Ring = std::vector<Point>;

struct Polygon {
    Ring exterior;
    std::vector<Ring> holes;
};

struct MultiPolygon {
    std::vector<Polygon> parts;
};

// Throw DataError (with ring/part position in the message) on open rings,
// rings with fewer than 3 distinct points, or a self-intersecting exterior.
void validate_ring(const Ring& r, const char* what);
void validate_polygon(const Polygon& p);
void validate_geometry(const MultiPolygon& g);

double ring_area_signed(const Ring& r);     // shoelace, CCW positive
double polygon_area(const Polygon& p);      // exterior minus holes, >= 0
double polygon_area(const MultiPolygon& g);

BBox geometry_bbox(const Polygon& p);
BBox geometry_bbox(const MultiPolygon& g);

// Even-odd ray casting over all rings; points exactly on any edge count as
// inside. Interior of a hole is outside.
bool point_in_polygon(Point pt, const Polygon& p);
bool point_in_polygon(Point pt, const MultiPolygon& g);

// Minimum Euclidean distance between the two geometries; 0 when they touch,
// overlap, or one contains the other.
double geometry_distance(const MultiPolygon& a, const MultiPolygon& b);

double segment_distance(Point a1, Point a2, Point b1, Point b2);

}  // namespace adc
