import { describe, expect, it } from 'vitest';

import { encodePng, pngDimensions } from '../src/png';
import { Canvas, viridis } from '../src/raster';

describe('png encoder', () => {
  it('writes the signature and dimensions', () => {
    const canvas = new Canvas(37, 23);
    const png = encodePng(37, 23, canvas.data);
    expect(png.subarray(0, 8)).toEqual(
      Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]),
    );
    expect(pngDimensions(png)).toEqual({ width: 37, height: 23 });
  });

  it('is deterministic for the same pixels', () => {
    const canvas = new Canvas(64, 64);
    canvas.line(0, 0, 63, 63, [255, 0, 0]);
    canvas.text(4, 4, 'HELLO 0.25', [0, 0, 0]);
    const a = encodePng(64, 64, canvas.data);
    const b = encodePng(64, 64, canvas.data);
    expect(a.equals(b)).toBe(true);
  });

  it('rejects mismatched buffer sizes', () => {
    expect(() => encodePng(10, 10, new Uint8Array(12))).toThrow(/pixel buffer/);
  });
});

describe('raster primitives', () => {
  it('clips out-of-bounds pixels', () => {
    const canvas = new Canvas(8, 8);
    canvas.set(-3, 100, [1, 2, 3]);
    expect(canvas.data[3]).toBe(255); // untouched background alpha
  });

  it('draws glyphs as filled pixels', () => {
    const canvas = new Canvas(16, 16, [255, 255, 255]);
    canvas.text(0, 0, '1', [0, 0, 0]);
    const dark = Array.from(canvas.data).filter((_, i) => i % 4 === 0 && canvas.data[i] === 0);
    expect(dark.length).toBeGreaterThan(5);
  });

  it('viridis endpoints', () => {
    expect(viridis(0)).toEqual([68, 1, 84]);
    expect(viridis(1)).toEqual([253, 231, 37]);
    expect(viridis(-5)).toEqual(viridis(0));
  });
});
