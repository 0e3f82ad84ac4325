// HTML-string views. The controller owns all state; these functions are
// pure so the flow can be tested without a DOM.

import { UnitPayload } from "./api";
import { SessionController } from "./session";

const SCALE_LABELS: Record<number, string> = { 1: "Not at all", 5: "Yes, definitely" };

const AGE_BANDS = ["18-24", "25-34", "35-44", "45-54", "55-64", "65+"];
const GENDERS = ["female", "male", "other", "prefer not to say"];

function escapeHtml(text: string): string {
    return text
        .replace(/&/g, "&amp;")
        .replace(/</g, "&lt;")
        .replace(/>/g, "&gt;")
        .replace(/"/g, "&quot;");
}

export function renderWelcome(instructions: string): string {
    return `
        <section class="screen" data-screen="welcome">
            <h1>Group interaction rating study</h1>
            <p class="instructions">${escapeHtml(instructions)}</p>
            <p>You will watch short clips of a group interaction and answer a few
               questions about each one. You may leave the study at any time.</p>
            <button id="begin">Begin</button>
        </section>`;
}

export function renderDemographics(): string {
    const ages = AGE_BANDS.map(
        (band) => `<option value="${band}">${band}</option>`,
    ).join("\n");
    const genders = GENDERS.map(
        (g) => `<option value="${g}">${g}</option>`,
    ).join("\n");
    return `
        <section class="screen" data-screen="demographics">
            <h2>About you</h2>
            <label for="age-band">Age band</label>
            <select id="age-band" required>${ages}</select>
            <label for="gender">Gender</label>
            <select id="gender">${genders}</select>
            <button id="start-session">Start rating</button>
        </section>`;
}

function renderLikertRow(itemId: string, text: string, selected: number | undefined): string {
    const choices = [1, 2, 3, 4, 5]
        .map((v) => {
            const label = SCALE_LABELS[v] !== undefined ? ` <small>${SCALE_LABELS[v]}</small>` : "";
            const checked = selected === v ? " checked" : "";
            return `
                <label class="likert-choice">
                    <input type="radio" name="item_${itemId}" value="${v}"${checked}>
                    ${v}${label}
                </label>`;
        })
        .join("\n");
    return `
        <fieldset class="item" data-item-id="${itemId}">
            <legend>${escapeHtml(text)}</legend>
            <div class="likert">${choices}</div>
        </fieldset>`;
}

export function renderUnit(payload: UnitPayload, controller: SessionController): string {
    // items arrive in served order, honey pot already in its slot
    const items = payload.items
        .map((item) => renderLikertRow(item.item_id, item.text, controller.answerFor(item.item_id)))
        .join("\n");
    const disabled = controller.canSubmit() ? "" : " disabled";
    const total = payload.served_position + payload.remaining - 1;
    return `
        <section class="screen" data-screen="rating">
            <header class="progress">
                Unit ${payload.served_position} of ${total}
                <button id="leave" class="leave">Leave study</button>
            </header>
            <div class="media">
                <video id="clip" src="${payload.clip_uri}" loop autoplay controls></video>
                <figure class="focus">
                    <img src="${payload.focus_image_uri}" alt="group to focus on">
                    <figcaption>Focus on this group</figcaption>
                </figure>
            </div>
            <p class="views" data-view-count="${controller.viewCount}">
                Viewings: ${controller.viewCount}
            </p>
            <form id="items">${items}</form>
            <button id="submit"${disabled}>Submit and continue</button>
        </section>`;
}

export function renderComplete(submitted: number): string {
    return `
        <section class="screen" data-screen="complete">
            <h2>All done — thank you!</h2>
            <p>You rated ${submitted} coding units.</p>
        </section>`;
}

export function renderLeft(submitted: number): string {
    return `
        <section class="screen" data-screen="left">
            <h2>Thanks for taking part</h2>
            <p>Your ${submitted} submitted rating${submitted === 1 ? "" : "s"} have been kept.</p>
        </section>`;
}
