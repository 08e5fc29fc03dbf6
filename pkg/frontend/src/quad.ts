/** Planar geometry for 4-point field regions. */

import type { Point } from "./types.js";

/** Signed area via the shoelace formula (positive = counter-clockwise). */
export function signedArea(points: readonly Point[]): number {
  let sum = 0;
  for (let i = 0; i < points.length; i++) {
    const [x1, y1] = points[i]!;
    const [x2, y2] = points[(i + 1) % points.length]!;
    sum += x1 * y2 - x2 * y1;
  }
  return sum / 2;
}

function orientation(a: Point, b: Point, c: Point): number {
  const value = (b[1] - a[1]) * (c[0] - b[0]) - (b[0] - a[0]) * (c[1] - b[1]);
  if (value > 1e-12) return 1;
  if (value < -1e-12) return -1;
  return 0;
}

function onSegment(a: Point, b: Point, p: Point): boolean {
  return (
    Math.min(a[0], b[0]) - 1e-12 <= p[0] &&
    p[0] <= Math.max(a[0], b[0]) + 1e-12 &&
    Math.min(a[1], b[1]) - 1e-12 <= p[1] &&
    p[1] <= Math.max(a[1], b[1]) + 1e-12
  );
}

/** Proper or degenerate intersection of segments ab and cd. */
export function segmentsIntersect(a: Point, b: Point, c: Point, d: Point): boolean {
  const o1 = orientation(a, b, c);
  const o2 = orientation(a, b, d);
  const o3 = orientation(c, d, a);
  const o4 = orientation(c, d, b);
  if (o1 !== o2 && o3 !== o4) return true;
  if (o1 === 0 && onSegment(a, b, c)) return true;
  if (o2 === 0 && onSegment(a, b, d)) return true;
  if (o3 === 0 && onSegment(c, d, a)) return true;
  if (o4 === 0 && onSegment(c, d, b)) return true;
  return false;
}

/** True when the closed polygon's non-adjacent edges cross (a "bow tie"). */
export function isSelfIntersecting(points: readonly Point[]): boolean {
  const n = points.length;
  if (n < 4) return false;
  for (let i = 0; i < n; i++) {
    for (let j = i + 1; j < n; j++) {
      // skip adjacent edges (they share an endpoint by construction)
      if (j === i + 1 || (i === 0 && j === n - 1)) continue;
      if (
        segmentsIntersect(
          points[i]!,
          points[(i + 1) % n]!,
          points[j]!,
          points[(j + 1) % n]!,
        )
      ) {
        return true;
      }
    }
  }
  return false;
}

export interface QuadProblem {
  readonly code:
    | "incomplete"
    | "self-intersecting"
    | "zero-area";
  readonly message: string;
}

/** All structural problems with a drawn quad (empty array = valid). */
export function quadProblems(points: readonly Point[]): QuadProblem[] {
  if (points.length !== 4) {
    return [
      {
        code: "incomplete",
        message: `quad has ${points.length} of 4 points`,
      },
    ];
  }
  const problems: QuadProblem[] = [];
  if (isSelfIntersecting(points)) {
    problems.push({
      code: "self-intersecting",
      message: "quad edges cross each other",
    });
  }
  if (Math.abs(signedArea(points)) < 1e-9) {
    problems.push({ code: "zero-area", message: "quad has no area" });
  }
  return problems;
}
