import java.util.Vector;

public class ElementExchanger {
    public static void exchange(Vector<Integer> items, int left, int right) {
        int stashA = items.get(left);
        int stashB = items.get(right);
        items.set(left, stashB);
        items.set(right, stashA);
    }
}
