/** Analytic curves recomputed from a record's own parameter columns.
 *
 * Nothing here is fitted or measured by the figure layer; these are the
 * closed forms the simulation package documents, evaluated at the
 * parameters carried in the record so overlays always match the data they
 * annotate.
 */

export function qfi(N: number, T: number): number {
  return 4 * N * T * T;
}

export function fitWeakOnly(g: number, tau: number, T: number, N: number): number {
  const y = (g * g * T) / tau;
  return ((8 / 3) * N * g * g * T ** 3) / tau / (1 + 0.77 * y + (2 / 3) * y * y);
}

export function fitWeakWithStrong(g: number, tau: number, T: number, N: number): number {
  const x = g * Math.sqrt(T / tau);
  return qfi(N, T) / (1 - 0.13 * x + x * x);
}

export function fitFor(mode: string, g: number, tau: number, T: number, N: number): number {
  return mode === "weak_only" ? fitWeakOnly(g, tau, T, N) : fitWeakWithStrong(g, tau, T, N);
}

/** log-spaced grid for smooth overlay curves on a log x axis */
export function logGrid(lo: number, hi: number, n = 200): number[] {
  const a = Math.log(lo);
  const b = Math.log(hi);
  const out: number[] = [];
  for (let i = 0; i < n; i++) {
    out.push(Math.exp(a + ((b - a) * i) / (n - 1)));
  }
  return out;
}
