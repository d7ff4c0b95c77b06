// Slider definitions mirroring the ranges the engine validates, so a bad
// value can never leave the browser.

export interface ParamSpec {
  label: string;
  min: number;
  max: number;
  step: number;
  value: number;
  minExclusive?: boolean;
  integer?: boolean;
}

export const PARAM_SPECS: Record<string, ParamSpec> = {
  lambda: { label: "λ (flattening)", min: 0, max: 1, step: 0.01, value: 0 },
  beta: { label: "β (detail gain)", min: 0, max: 2, step: 0.01, value: 1, minExclusive: true },
  gamma: { label: "γ (detail exponent)", min: 0, max: 2, step: 0.01, value: 1, minExclusive: true },
  sigma_c: { label: "σc (band width, px)", min: 0, max: 30, step: 0.5, value: 3, minExclusive: true },
  sigma_s: { label: "σs (similarity)", min: 0, max: 10, step: 0.1, value: 0.9, minExclusive: true },
  alpha: { label: "α (gradient attenuation)", min: 0, max: 4, step: 0.1, value: 1 },
  alpha1: { label: "α₁ (detail z scale)", min: 0, max: 4, step: 0.05, value: 1, minExclusive: true },
  alpha2: { label: "α₂ (detail z decay)", min: 0, max: 1, step: 0.01, value: 0.5, minExclusive: true },
  omega: { label: "ω (edge fidelity)", min: 0, max: 20, step: 0.5, value: 2 },
  iterations: { label: "diffusion iterations", min: 0, max: 5000, step: 50, value: 500, integer: true },
  z: { label: "base z (lift)", min: 0, max: 4, step: 0.05, value: 1, minExclusive: true },
  low: { label: "Canny low", min: 0, max: 1, step: 0.01, value: 0.1 },
  high: { label: "Canny high", min: 0, max: 1, step: 0.01, value: 0.3 },
};

export function validateParam(name: string, value: number): string | null {
  const spec = PARAM_SPECS[name];
  if (!spec) return `unknown parameter '${name}'`;
  if (!Number.isFinite(value)) return `${name} must be a number`;
  if (spec.integer && !Number.isInteger(value)) return `${name} must be an integer`;
  if (spec.minExclusive ? value <= spec.min : value < spec.min) {
    return `${name} must be ${spec.minExclusive ? ">" : ">="} ${spec.min}`;
  }
  if (value > spec.max) return `${name} must be <= ${spec.max}`;
  return null;
}

export function defaults(): Record<string, number> {
  const out: Record<string, number> = {};
  for (const [name, spec] of Object.entries(PARAM_SPECS)) out[name] = spec.value;
  return out;
}

// Canny thresholds are coupled: low may not exceed high.
export function validateParams(params: Record<string, number>): string[] {
  const errors: string[] = [];
  for (const [name, value] of Object.entries(params)) {
    const message = validateParam(name, value);
    if (message) errors.push(message);
  }
  if (params.low !== undefined && params.high !== undefined && params.low > params.high) {
    errors.push("Canny low must be <= high");
  }
  return errors;
}
