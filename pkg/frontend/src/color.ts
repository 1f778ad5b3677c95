/** Display math for amplitude bars: magnitude = bar height, phase = hue.
 * This is presentation of server numbers, never state computation. */

export function magnitude(re: number, im: number): number {
  return Math.hypot(re, im);
}

/** Phase in degrees, mapped to [0, 360). Positive reals are red (0),
 * negative reals cyan-ish (180), so sign flips are immediately visible. */
export function phaseDegrees(re: number, im: number): number {
  const deg = (Math.atan2(im, re) * 180) / Math.PI;
  return (deg + 360) % 360;
}

export function phaseColor(re: number, im: number): string {
  return `hsl(${phaseDegrees(re, im).toFixed(1)} 75% 55%)`;
}
