const calendar = new FullCalendar.Calendar(document.getElementById("calendar"), {
  initialView: "dayGridMonth",
  headerToolbar: { right: "dayGridMonth,timeGridWeek,timeGridDay" },
});

function findEvent(title) {
  return calendar.getEvents().find((e) => e.title === title);
}

function moveEvent(eventName, newDate) {
  const event = findEvent(eventName);
  if (!event) {
    geno.say(`I could not find ${eventName}`);
    return;
  }
  event.setStart(chrono.parseDate(newDate));
}

document.addEventListener("DOMContentLoaded", () => calendar.render());
