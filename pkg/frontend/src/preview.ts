// Preview refresh after each mutation: fetch the named artifact, dropping
// stale responses when refreshes overlap.

import { Client } from "./api.js";

export class PreviewPoller {
  private version = 0;

  constructor(
    private readonly client: Client,
    private readonly onFresh: (blob: Blob, artifact: string) => void,
    private readonly onMissing: () => void = () => undefined,
  ) {}

  async refresh(sid: string, artifact = "preview.png"): Promise<boolean> {
    const ticket = ++this.version;
    let blob: Blob;
    try {
      blob = await this.client.fetchArtifact(sid, artifact);
    } catch {
      if (ticket === this.version) this.onMissing();
      return false;
    }
    if (ticket !== this.version) return false; // a newer refresh superseded us
    this.onFresh(blob, artifact);
    return true;
  }
}
