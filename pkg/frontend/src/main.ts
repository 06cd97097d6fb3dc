import { mountAdmin } from "./admin";
import { el } from "./dialogs";
import { mountPlayer } from "./player";

function mountMenu(app: HTMLElement): void {
  const pane = el("div", "pane menu-pane");
  pane.append(el("h1", "", "spacerace"));
  pane.append(el("p", "muted", "Race your rivals across the research station: answer questions at the machines, fuel the rocket, launch first."));
  const play = el("a", "menu-link", "play") as HTMLAnchorElement;
  play.href = "/play";
  const host = el("a", "menu-link", "host") as HTMLAnchorElement;
  host.href = "/admin";
  pane.append(play, host);
  app.appendChild(pane);
}

const app = document.getElementById("app")!;
const path = location.pathname;
if (path.startsWith("/play")) {
  mountPlayer(app);
} else if (path.startsWith("/admin")) {
  mountAdmin(app);
} else {
  mountMenu(app);
}
