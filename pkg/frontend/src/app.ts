// Editor wiring: canvases, sliders, and op buttons around an EditorSession.
// All relief math happens server-side; this file only moves pixels and JSON.

import { ApiError, Client, SolveBusyError } from "./api.js";
import { blobToGray, gridToPngBlob } from "./canvas.js";
import { LayerOffsets } from "./layers.js";
import { MaskEditor } from "./mask.js";
import { PARAM_SPECS } from "./params.js";
import { placementFromDrag, transferRequest } from "./patch.js";
import { PreviewPoller } from "./preview.js";
import { EditorSession } from "./session.js";
import { SketchEditor } from "./sketch.js";

type Mode = "view" | "mask" | "sketch" | "patch";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

class EditorApp {
  private client!: Client;
  private session!: EditorSession;
  private preview!: PreviewPoller;

  private mode: Mode = "view";
  private mask: MaskEditor | null = null;
  private sketch: SketchEditor | null = null;
  private layers = new LayerOffsets();
  private patchOffset = { x: 0, y: 0 };
  private dragStart: { x: number; y: number } | null = null;
  private dragBase = { x: 0, y: 0 };
  private viewImage: ImageBitmap | null = null;

  private readonly view = el<HTMLCanvasElement>("view-canvas");
  private readonly overlay = el<HTMLCanvasElement>("overlay-canvas");
  private readonly errors = el<HTMLDivElement>("errors");
  private readonly status = el<HTMLSpanElement>("status");
  private readonly artifactList = el<HTMLUListElement>("artifact-list");
  private readonly sourceSelect = el<HTMLSelectElement>("source-select");
  private readonly secondSelect = el<HTMLSelectElement>("second-select");
  private readonly solveButton = el<HTMLButtonElement>("op-solve");
  private readonly previewImg = el<HTMLImageElement>("preview-img");

  start(): void {
    this.buildSliders();
    this.wireToolbar();
    this.wireCanvas();
    this.wireOps();
    this.wireLayers();
  }

  private param(name: string): number {
    return this.session ? this.session.params[name] : PARAM_SPECS[name].value;
  }

  private buildSliders(): void {
    const holder = el<HTMLDivElement>("sliders");
    for (const [name, spec] of Object.entries(PARAM_SPECS)) {
      const row = document.createElement("label");
      row.className = "slider-row";
      const text = document.createElement("span");
      text.textContent = `${spec.label}: ${spec.value}`;
      const input = document.createElement("input");
      input.type = "range";
      // exclusive lower bounds start one step in, matching engine validation
      input.min = String(spec.minExclusive ? spec.min + spec.step : spec.min);
      input.max = String(spec.max);
      input.step = String(spec.step);
      input.value = String(spec.value);
      input.addEventListener("input", () => {
        try {
          this.session.setParam(name, Number(input.value));
          text.textContent = `${spec.label}: ${input.value}`;
          this.clearError();
        } catch (err) {
          this.showError(err);
        }
      });
      row.append(text, input);
      holder.append(row);
    }
  }

  private wireToolbar(): void {
    el<HTMLButtonElement>("connect").addEventListener("click", () => {
      void this.guard(async () => {
        const base = el<HTMLInputElement>("base-url").value;
        this.client = new Client(base);
        this.session = new EditorSession(this.client);
        this.preview = new PreviewPoller(
          this.client,
          (blob) => {
            this.previewImg.src = URL.createObjectURL(blob);
          },
        );
        this.session.onChange(() => this.render());
        await this.session.connect();
        this.status.textContent = `session ${this.session.id}`;
      });
    });

    const uploadPicker = el<HTMLInputElement>("upload-file");
    el<HTMLButtonElement>("upload").addEventListener("click", () => {
      void this.guard(async () => {
        const file = uploadPicker.files?.[0];
        if (!file) throw new Error("choose a PNG first");
        const name = el<HTMLInputElement>("upload-name").value || file.name.replace(/\W+/g, "-");
        await this.session.upload(name, file);
      });
    });
  }

  private canvasPoint(event: MouseEvent): { x: number; y: number } {
    const rect = this.overlay.getBoundingClientRect();
    return {
      x: ((event.clientX - rect.left) / rect.width) * this.overlay.width,
      y: ((event.clientY - rect.top) / rect.height) * this.overlay.height,
    };
  }

  private wireCanvas(): void {
    el<HTMLSelectElement>("mode-select").addEventListener("change", (e) => {
      this.mode = (e.target as HTMLSelectElement).value as Mode;
      this.renderOverlay();
    });
    const brush = el<HTMLInputElement>("brush-radius");

    this.overlay.addEventListener("mousedown", (e) => {
      const p = this.canvasPoint(e);
      if (this.mode === "mask" && this.mask) {
        this.mask.brushRadius = Number(brush.value);
        this.mask.erasing = e.shiftKey;
        this.mask.beginStroke(p.x, p.y);
      } else if (this.mode === "sketch" && this.sketch) {
        this.sketch.eraserRadius = Number(brush.value);
        this.sketch.beginErase(p.x, p.y);
      } else if (this.mode === "patch") {
        this.dragStart = p;
        this.dragBase = { ...this.patchOffset };
      }
      this.renderOverlay();
    });
    this.overlay.addEventListener("mousemove", (e) => {
      if (!(e.buttons & 1)) return;
      const p = this.canvasPoint(e);
      if (this.mode === "mask" && this.mask) this.mask.continueStroke(p.x, p.y);
      else if (this.mode === "sketch" && this.sketch) this.sketch.continueErase(p.x, p.y);
      else if (this.mode === "patch" && this.dragStart) {
        this.patchOffset = placementFromDrag(this.dragBase, this.dragStart, p);
        el<HTMLSpanElement>("patch-offset").textContent =
          `offset (${this.patchOffset.x}, ${this.patchOffset.y})`;
      }
      this.renderOverlay();
    });
    window.addEventListener("mouseup", () => {
      this.mask?.endStroke();
      this.sketch?.endErase();
      this.dragStart = null;
    });

    el<HTMLButtonElement>("undo").addEventListener("click", () => {
      if (this.mode === "mask") this.mask?.undo();
      if (this.mode === "sketch") this.sketch?.undo();
      this.renderOverlay();
    });
    el<HTMLButtonElement>("mask-fill").addEventListener("click", () => {
      this.mask?.fillAll();
      this.renderOverlay();
    });
    el<HTMLButtonElement>("mask-clear").addEventListener("click", () => {
      this.mask?.clearAll();
      this.renderOverlay();
    });

    el<HTMLButtonElement>("upload-mask").addEventListener("click", () => {
      void this.guard(async () => {
        if (!this.mask) throw new Error("nothing painted yet");
        await this.session.upload("paint", await gridToPngBlob(this.mask.grid));
      });
    });
    el<HTMLButtonElement>("upload-sketch").addEventListener("click", () => {
      void this.guard(async () => {
        if (!this.sketch) throw new Error("no sketch loaded");
        await this.session.upload("sketch", await gridToPngBlob(this.sketch.grid));
      });
    });
  }

  private async showArtifact(name: string): Promise<void> {
    const blob = await this.client.fetchArtifact(this.session.id, name);
    this.viewImage = await createImageBitmap(blob);
    this.view.width = this.overlay.width = this.viewImage.width;
    this.view.height = this.overlay.height = this.viewImage.height;
    const ctx = this.view.getContext("2d");
    ctx?.drawImage(this.viewImage, 0, 0);
    if (!this.mask || this.mask.grid.width !== this.view.width || this.mask.grid.height !== this.view.height) {
      this.mask = new MaskEditor(this.view.width, this.view.height);
    }
    if (name.includes("edges") || name.includes("sketch")) {
      const { width, height, gray } = await blobToGray(blob);
      this.sketch = SketchEditor.fromEdgeBitmap(width, height, gray);
    }
    this.renderOverlay();
  }

  private renderOverlay(): void {
    const ctx = this.overlay.getContext("2d");
    if (!ctx) return;
    ctx.clearRect(0, 0, this.overlay.width, this.overlay.height);
    if (this.mode === "mask" && this.mask) {
      const image = ctx.createImageData(this.overlay.width, this.overlay.height);
      const gray = this.mask.grid.toGray8();
      for (let i = 0; i < gray.length; i++) {
        image.data[4 * i] = 255;
        image.data[4 * i + 3] = gray[i] / 2; // translucent red wash
      }
      ctx.putImageData(image, 0, 0);
    } else if (this.mode === "sketch" && this.sketch) {
      const image = ctx.createImageData(this.overlay.width, this.overlay.height);
      const gray = this.sketch.grid.toGray8();
      for (let i = 0; i < gray.length; i++) {
        image.data[4 * i] = image.data[4 * i + 1] = image.data[4 * i + 2] = gray[i];
        image.data[4 * i + 3] = 255;
      }
      ctx.putImageData(image, 0, 0);
    } else if (this.mode === "patch") {
      ctx.strokeStyle = "#2bd";
      ctx.lineWidth = 2;
      ctx.strokeRect(this.patchOffset.x, this.patchOffset.y, 64, 64);
    }
  }

  private selections(): { source: string; second: string } {
    return { source: this.sourceSelect.value, second: this.secondSelect.value };
  }

  private wireOps(): void {
    const run = (op: string, body: () => Record<string, unknown>) => {
      void this.guard(async () => {
        await this.session.run(op, body());
        await this.preview.refresh(this.session.id);
      });
    };

    el<HTMLButtonElement>("op-decompose").addEventListener("click", () =>
      run("decompose", () => ({
        input: this.selections().source,
        sigma_c: this.param("sigma_c"),
        sigma_s: this.param("sigma_s"),
      })),
    );
    el<HTMLButtonElement>("op-tune").addEventListener("click", () =>
      run("tune", () => ({
        input: this.selections().source,
        beta: this.param("beta"),
        gamma: this.param("gamma"),
      })),
    );
    el<HTMLButtonElement>("op-compose").addEventListener("click", () =>
      run("compose", () => ({
        detail: this.selections().source,
        base: this.selections().second,
      })),
    );
    el<HTMLButtonElement>("op-smooth").addEventListener("click", () =>
      run("smooth", () => ({
        input: this.selections().source,
        mask: "paint",
        sigma_c: this.param("sigma_c"),
        sigma_s: this.param("sigma_s"),
      })),
    );
    el<HTMLButtonElement>("op-img2normal").addEventListener("click", () =>
      run("img2normal", () => ({
        input: this.selections().source,
        alpha1: this.param("alpha1"),
        alpha2: this.param("alpha2"),
      })),
    );
    el<HTMLButtonElement>("op-canny").addEventListener("click", () =>
      run("canny", () => ({
        input: this.selections().source,
        low: this.param("low"),
        high: this.param("high"),
      })),
    );
    el<HTMLButtonElement>("op-sketch2base").addEventListener("click", () =>
      run("sketch2base", () => ({
        input: "sketch",
        omega: this.param("omega"),
        iterations: this.param("iterations"),
        z: this.param("z"),
      })),
    );
    el<HTMLButtonElement>("op-transfer").addEventListener("click", () =>
      run("transfer", () =>
        transferRequest({
          patch: this.selections().source,
          patchMask: "paint",
          base: this.selections().second,
          offsetX: this.patchOffset.x,
          offsetY: this.patchOffset.y,
        }),
      ),
    );

    this.solveButton.addEventListener("click", () => {
      void this.guard(async () => {
        const body: Record<string, unknown> = {
          normal: this.selections().source,
          lambda: this.param("lambda"),
          alpha: this.param("alpha"),
          rescale: 1.0,
        };
        if (this.layers.size > 0) {
          body.aux = this.layers.auxSpec(el<HTMLInputElement>("labels-input").value || "labels");
        }
        await this.session.solve(body);
        await this.preview.refresh(this.session.id);
      });
    });
  }

  private wireLayers(): void {
    el<HTMLButtonElement>("layer-add").addEventListener("click", () => {
      const label = Number(el<HTMLInputElement>("layer-label").value);
      const offset = Number(el<HTMLInputElement>("layer-offset").value);
      const problem = this.layers.set(label, offset);
      if (problem) {
        this.showError(new Error(problem));
        return;
      }
      el<HTMLUListElement>("layer-list").innerHTML = this.layers
        .entries()
        .map(([l, o]) => `<li>label ${l} &rarr; ${o}</li>`)
        .join("");
    });
  }

  private render(): void {
    this.solveButton.disabled = !this.session.connected || this.session.isSolvePending;
    this.solveButton.textContent = this.session.isSolvePending ? "solving…" : "Solve";
    const names = [...this.session.inputs, ...this.session.artifacts].sort();
    for (const select of [this.sourceSelect, this.secondSelect]) {
      const keep = select.value;
      select.innerHTML = "";
      for (const name of names) {
        const option = document.createElement("option");
        option.value = option.textContent = name;
        select.append(option);
      }
      if (names.includes(keep)) select.value = keep;
    }
    this.artifactList.innerHTML = "";
    for (const name of [...this.session.artifacts].sort()) {
      const item = document.createElement("li");
      const link = document.createElement("a");
      link.href = "#";
      link.textContent = name;
      link.addEventListener("click", (e) => {
        e.preventDefault();
        void this.guard(() => this.showArtifact(name));
      });
      item.append(link);
      this.artifactList.append(item);
    }
  }

  private clearError(): void {
    this.errors.textContent = "";
  }

  private showError(err: unknown): void {
    if (err instanceof SolveBusyError) this.errors.textContent = "solve already running — wait for the preview";
    else if (err instanceof ApiError) this.errors.textContent = `server: ${err.message}`;
    else this.errors.textContent = String(err instanceof Error ? err.message : err);
  }

  private async guard(job: () => Promise<unknown>): Promise<void> {
    try {
      this.clearError();
      await job();
    } catch (err) {
      this.showError(err);
    }
  }
}

new EditorApp().start();
