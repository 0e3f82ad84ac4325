// Browser bootstrap: wires the controller and views to the DOM.

import { ApiClient } from "./api";
import {
    renderComplete,
    renderDemographics,
    renderLeft,
    renderUnit,
    renderWelcome,
} from "./render";
import { SessionController } from "./session";

const api = new ApiClient(window.location.origin.replace(/\/$/, ""));
const controller = new SessionController(api, window.localStorage);
const root = document.getElementById("app")!;

async function show(): Promise<void> {
    switch (controller.screen) {
        case "welcome":
            root.innerHTML = renderWelcome(controller.instructions);
            document.getElementById("begin")!.addEventListener("click", () => {
                controller.acknowledgeWelcome();
                void show();
            });
            return;
        case "demographics":
            root.innerHTML = renderDemographics();
            document.getElementById("start-session")!.addEventListener("click", async () => {
                const age = (document.getElementById("age-band") as HTMLSelectElement).value;
                const gender = (document.getElementById("gender") as HTMLSelectElement).value;
                await controller.start({ age_band: age, gender });
                void show();
            });
            return;
        case "rating":
            await showUnit();
            return;
        case "complete":
            root.innerHTML = renderComplete(controller.submitted);
            return;
        case "left":
            root.innerHTML = renderLeft(controller.submitted);
            return;
    }
}

async function showUnit(): Promise<void> {
    const payload = await controller.loadUnit();
    if (payload === null) {
        void show();
        return;
    }
    root.innerHTML = renderUnit(payload, controller);
    const video = document.getElementById("clip") as HTMLVideoElement;
    video.addEventListener("ended", () => controller.recordView());
    video.addEventListener("play", () => {
        if (controller.viewCount === 0) controller.recordView();
    });
    document.getElementById("items")!.addEventListener("change", (event) => {
        const input = event.target as HTMLInputElement;
        if (input.name?.startsWith("item_")) {
            controller.setAnswer(input.name.slice("item_".length), Number(input.value));
            const submit = document.getElementById("submit") as HTMLButtonElement;
            submit.disabled = !controller.canSubmit();
        }
    });
    document.getElementById("leave")!.addEventListener("click", () => {
        controller.leave();
        void show();
    });
    document.getElementById("submit")!.addEventListener("click", async () => {
        await controller.submit();
        void show();
    });
}

if (!controller.resume()) controller.screen = "welcome";
void show();
