import { describe, expect, it } from "vitest";

import { PARAM_SPECS, defaults, validateParam, validateParams } from "../src/params.js";

describe("parameter specs", () => {
  it("lambda slider spans exactly [0, 1]", () => {
    expect(PARAM_SPECS.lambda.min).toBe(0);
    expect(PARAM_SPECS.lambda.max).toBe(1);
    expect(PARAM_SPECS.lambda.minExclusive).toBeUndefined();
  });

  it("beta and gamma span (0, 2]", () => {
    for (const name of ["beta", "gamma"]) {
      expect(PARAM_SPECS[name].min).toBe(0);
      expect(PARAM_SPECS[name].max).toBe(2);
      expect(PARAM_SPECS[name].minExclusive).toBe(true);
    }
  });

  it("rejects the same values the engine rejects", () => {
    expect(validateParam("sigma_c", 0)).toMatch(/sigma_c/);
    expect(validateParam("sigma_c", -3)).toMatch(/sigma_c/);
    expect(validateParam("lambda", -0.1)).toMatch(/lambda/);
    expect(validateParam("gamma", 0)).toMatch(/gamma/);
    expect(validateParam("lambda", 1.5)).toMatch(/<=/);
    expect(validateParam("iterations", 10.5)).toMatch(/integer/);
    expect(validateParam("nonsense", 1)).toMatch(/unknown/);
  });

  it("accepts in-range values", () => {
    expect(validateParam("lambda", 0)).toBeNull();
    expect(validateParam("lambda", 1)).toBeNull();
    expect(validateParam("beta", 2)).toBeNull();
    expect(validateParam("sigma_c", 3)).toBeNull();
  });

  it("couples canny thresholds", () => {
    expect(validateParams({ low: 0.5, high: 0.2 })).toContainEqual(
      expect.stringContaining("low"),
    );
    expect(validateParams({ low: 0.1, high: 0.3 })).toEqual([]);
  });

  it("defaults are themselves valid", () => {
    expect(validateParams(defaults())).toEqual([]);
  });
});
