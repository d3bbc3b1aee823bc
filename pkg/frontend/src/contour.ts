/** Marching-squares iso-contour segments for a rectangular grid.
 *
 * Values are indexed grid[i][j] at coordinates (xs[i], ys[j]); the result
 * is a list of line segments in data coordinates at the given level.
 * NaN cells are skipped.
 */

export type Segment = [[number, number], [number, number]];

export function contourSegments(
  xs: number[],
  ys: number[],
  grid: number[][],
  level: number,
): Segment[] {
  const segments: Segment[] = [];
  for (let i = 0; i < xs.length - 1; i++) {
    for (let j = 0; j < ys.length - 1; j++) {
      const v00 = grid[i][j];
      const v10 = grid[i + 1][j];
      const v01 = grid[i][j + 1];
      const v11 = grid[i + 1][j + 1];
      if ([v00, v10, v01, v11].some((v) => !Number.isFinite(v))) continue;
      // corner order: 1=(i,j), 2=(i+1,j), 4=(i+1,j+1), 8=(i,j+1)
      let code = 0;
      if (v00 > level) code |= 1;
      if (v10 > level) code |= 2;
      if (v11 > level) code |= 4;
      if (v01 > level) code |= 8;
      if (code === 0 || code === 15) continue;

      const lerp = (a: number, b: number, va: number, vb: number) =>
        a + ((level - va) / (vb - va)) * (b - a);
      // edge midpoints with linear interpolation
      const bottom = (): [number, number] => [lerp(xs[i], xs[i + 1], v00, v10), ys[j]];
      const top = (): [number, number] => [lerp(xs[i], xs[i + 1], v01, v11), ys[j + 1]];
      const left = (): [number, number] => [xs[i], lerp(ys[j], ys[j + 1], v00, v01)];
      const right = (): [number, number] => [xs[i + 1], lerp(ys[j], ys[j + 1], v10, v11)];

      const push = (a: [number, number], b: [number, number]) =>
        segments.push([a, b]);
      switch (code) {
        case 1: case 14: push(left(), bottom()); break;
        case 2: case 13: push(bottom(), right()); break;
        case 3: case 12: push(left(), right()); break;
        case 4: case 11: push(top(), right()); break;
        case 6: case 9: push(bottom(), top()); break;
        case 7: case 8: push(left(), top()); break;
        case 5:
          push(left(), bottom());
          push(top(), right());
          break;
        case 10:
          push(left(), top());
          push(bottom(), right());
          break;
      }
    }
  }
  return segments;
}
